#pragma once
// Independent references for the tests: dense Gaussian elimination instead of the
// library's power method / LU path, and small random graphs with known properties.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "diver/graph.hpp"

namespace support {

using Dense = std::vector<std::vector<double>>;

inline Dense dense(const diver::Graph& g) {
    const std::size_t n = g.size();
    Dense w(n, std::vector<double>(n, 0.0));
    for (diver::NodeId u = 0; u < n; ++u) {
        const auto cols = g.neighbors(u);
        const auto ws = g.weights(u);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            w[u][cols[k]] = ws[k];
        }
    }
    return w;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Dense a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        if (std::abs(a[piv][col]) < 1e-300) {
            throw std::runtime_error("singular system");
        }
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    return x;
}

/// Stationary distribution: pi^T (I - W) = 0 with one equation replaced by sum(pi) = 1.
inline std::vector<double> stationary(const Dense& w) {
    const std::size_t n = w.size();
    Dense a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[j][i] = (i == j ? 1.0 : 0.0) - w[i][j];
        }
    }
    std::vector<double> b(n, 0.0);
    a[n - 1].assign(n, 1.0);
    b[n - 1] = 1.0;
    return solve(a, b);
}

/// MFPTs by first-step analysis, one linear system per target:
///   m_ij = 1 + sum_{k != j} w_ik m_kj.
inline Dense mfpt(const Dense& w) {
    const std::size_t n = w.size();
    Dense m(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        Dense a(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                a[i][k] = (i == k ? 1.0 : 0.0) - (k == j ? 0.0 : w[i][k]);
            }
        }
        const auto col = solve(a, std::vector<double>(n, 1.0));
        for (std::size_t i = 0; i < n; ++i) {
            m[i][j] = col[i];
        }
    }
    return m;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

/// Random strongly connected, aperiodic graph where every row is rationally selfish:
/// a directed ring guarantees connectivity, extra random edges give variety.
inline diver::Graph random_selfish_graph(std::mt19937_64& rng, std::size_t n,
                                         double extra_density = 0.3) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<diver::Edge> edges;
    for (diver::NodeId u = 0; u < n; ++u) {
        std::vector<diver::NodeId> nbrs{static_cast<diver::NodeId>((u + 1) % n)};
        for (diver::NodeId v = 0; v < n; ++v) {
            if (v != u && v != nbrs[0] && unit(rng) < extra_density) {
                nbrs.push_back(v);
            }
        }
        std::vector<double> raw(nbrs.size());
        for (auto& r : raw) {
            r = 0.05 + unit(rng);
        }
        const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
        double self = 0.3 + 0.6 * unit(rng);
        const double rest = 1.0 - self;
        const double biggest = *std::max_element(raw.begin(), raw.end()) / total * rest;
        if (biggest >= self) { // keep the row selfish
            self = std::min(0.95, biggest + 0.05);
        }
        const double scale = (1.0 - self) / total;
        double sum = self;
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            const double w = raw[k] * scale;
            edges.push_back({u, nbrs[k], w});
            sum += w;
        }
        edges.push_back({u, u, self + (1.0 - sum)});
    }
    return diver::Graph::from_edges(n, std::move(edges));
}

inline std::vector<double> random_opinions(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = unit(rng);
    }
    return x;
}

} // namespace support
