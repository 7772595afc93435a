#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "diver/kernels.hpp"
#include "walk_step.hpp"

namespace diver::kernels {

Transpose transpose(const Graph& g) {
    const std::size_t n = g.size();
    Transpose t;
    t.offsets.assign(n + 1, 0);
    for (const NodeId v : g.columns()) {
        ++t.offsets[v + 1];
    }
    std::partial_sum(t.offsets.begin(), t.offsets.end(), t.offsets.begin());
    t.rows.resize(g.edge_count());
    t.weights.resize(g.edge_count());
    std::vector<std::size_t> fill(t.offsets.begin(), t.offsets.end() - 1);
    for (NodeId u = 0; u < n; ++u) {
        const auto cols = g.neighbors(u);
        const auto w = g.weights(u);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const std::size_t pos = fill[cols[k]]++;
            t.rows[pos] = u;
            t.weights[pos] = w[k];
        }
    }
    return t;
}

void left_multiply_serial(const Graph& g, std::span<const double> x, std::span<double> y) {
    std::fill(y.begin(), y.end(), 0.0);
    const auto offsets = g.offsets();
    const auto cols = g.columns();
    const auto vals = g.values();
    for (std::size_t u = 0; u < g.size(); ++u) {
        const double xu = x[u];
        for (std::size_t k = offsets[u]; k < offsets[u + 1]; ++k) {
            y[cols[k]] += xu * vals[k];
        }
    }
}

double sum_serial(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0);
}

double l1_distance_serial(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return s;
}

void score_candidates_serial(const ScoringInputs& in, std::span<const Candidate> cands,
                             std::span<double> scores) {
    const std::size_t h = in.hubs.size();
    for (std::size_t k = 0; k < cands.size(); ++k) {
        const auto& cand = cands[k];
        const NodeId r = in.sources[cand.source];
        const NodeId c = cand.c;
        const double* from_r = in.from_src.data() + cand.source * in.n;
        const double* to_from_c = in.to_hub.data() + static_cast<std::size_t>(c) * h;

        auto term = [&](NodeId j, double m_cj) {
            const double m_rj = from_r[j];
            return in.pi[j] * ((j == c ? 0.0 : m_cj) - m_rj + 1.0) * in.x_tilde[j];
        };

        double numer = 0.0;
        for (std::size_t t = 0; t < h; ++t) {
            numer += term(in.hubs[t], to_from_c[t]);
        }
        // r is always a hub; c joins the sum when it is not one already
        if (in.hub_index[c] < 0) {
            numer += term(c, 0.0);
        }
        const double m_rr = from_r[r];
        const double m_cr = to_from_c[in.source_hub[cand.source]];
        const double denom = m_rr + cand.theta * (m_cr - m_rr + 1.0);
        scores[k] = cand.theta * numer / denom;
    }
}

WalkTable walk_table(const Graph& g) {
    const std::size_t n = g.size();
    if (n + g.edge_count() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error("graph too large for the walk table");
    }
    WalkTable t;
    t.row_of.resize(n);
    std::uint32_t at = 0;
    for (NodeId u = 0; u < n; ++u) {
        t.row_of[u] = at;
        at += static_cast<std::uint32_t>(g.neighbors(u).size()) + 1;
    }
    t.cells.reserve(at);
    for (NodeId u = 0; u < n; ++u) {
        const auto cols = g.neighbors(u);
        const auto w = g.weights(u);
        if (cols.empty()) {
            throw Error("walk table: node " + std::to_string(u) + " has no out-edges");
        }
        const std::size_t header = t.cells.size();
        t.cells.push_back({0.0, static_cast<NodeId>(cols.size()), 0});
        double acc = 0.0;
        const auto self = std::find(cols.begin(), cols.end(), u);
        if (self != cols.end()) {
            acc = w[static_cast<std::size_t>(self - cols.begin())];
            t.cells.push_back({acc, u, t.row_of[u]});
        }
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] != u) {
                acc += w[k];
                t.cells.push_back({acc, cols[k], t.row_of[cols[k]]});
            }
        }
        t.cells[header].cumulative = acc;
    }
    return t;
}

WalkTallies walk_tallies_serial(const WalkTable& table, std::size_t n,
                                std::span<const NodeId> hubs, NodeId start,
                                std::uint64_t steps, std::uint64_t seed) {
    const std::size_t h = hubs.size();
    WalkTallies out;
    out.n = n;
    out.hubs = h;
    out.to_sum.assign(n * h, 0);
    out.to_count.assign(n * h, 0);
    out.from_sum.assign(h * n, 0);
    out.from_count.assign(h * n, 0);
    out.visits.assign(n, 0);

    std::vector<std::int64_t> hub_of(n, -1);
    for (std::size_t t = 0; t < h; ++t) {
        hub_of[hubs[t]] = static_cast<std::int64_t>(t);
    }

    // to-hub bookkeeping: epoch of the current excursion between two hits of each hub,
    // and the first time each node was seen within it
    std::vector<std::uint64_t> epoch(h, 1);
    std::vector<std::uint64_t> seen_epoch(n * h, 0);
    std::vector<std::int64_t> seen_time(n * h, 0);
    std::vector<std::vector<NodeId>> seen_list(h);

    // from-hub bookkeeping: running visit count and visit-time sum of each hub, and
    // their values when each node was last visited
    std::vector<std::uint64_t> hub_visits(h, 0);
    std::vector<std::int64_t> hub_time_sum(h, 0);
    std::vector<std::uint64_t> snap_visits(n * h, 0);
    std::vector<std::int64_t> snap_time_sum(n * h, 0);

    std::mt19937_64 rng(seed);
    NodeId v = start;
    for (std::uint64_t step = 0;; ++step) {
        const auto s = static_cast<std::int64_t>(step);
        ++out.visits[v];
        const std::int64_t hv = hub_of[v];
        if (hv >= 0) {
            const auto t = static_cast<std::size_t>(hv);
            for (const NodeId i : seen_list[t]) {
                out.to_sum[i * h + t] += s - seen_time[i * h + t];
                ++out.to_count[i * h + t];
            }
            seen_list[t].clear();
            ++epoch[t];
        }
        for (std::size_t t = 0; t < h; ++t) {
            const std::size_t idx = static_cast<std::size_t>(v) * h + t;
            if (seen_epoch[idx] != epoch[t]) {
                seen_epoch[idx] = epoch[t];
                seen_time[idx] = s;
                seen_list[t].push_back(v);
            }
        }
        for (std::size_t t = 0; t < h; ++t) {
            const std::size_t idx = static_cast<std::size_t>(v) * h + t;
            const std::uint64_t dc = hub_visits[t] - snap_visits[idx];
            if (dc > 0) {
                out.from_sum[t * n + v] +=
                    static_cast<std::int64_t>(dc) * s - (hub_time_sum[t] - snap_time_sum[idx]);
                out.from_count[t * n + v] += dc;
            }
            snap_visits[idx] = hub_visits[t];
            snap_time_sum[idx] = hub_time_sum[t];
        }
        if (hv >= 0) {
            ++hub_visits[static_cast<std::size_t>(hv)];
            hub_time_sum[static_cast<std::size_t>(hv)] += s;
        }
        if (step == steps) {
            break;
        }
        v = detail::next_cell(table, table.row_of[v], rng).next;
    }
    return out;
}

std::uint64_t binomial(std::uint64_t m, std::uint64_t k) {
    if (k > m) {
        return 0;
    }
    k = std::min(k, m - k);
    std::uint64_t acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // acc * (m-k+i) is i * C(m-k+i, i), so the division is exact; saturate on overflow
        std::uint64_t wide = 0;
        if (__builtin_mul_overflow(acc, m - k + i, &wide)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        acc = wide / i;
    }
    return acc;
}

void unrank_combination(std::uint64_t rank, std::size_t m, std::size_t k,
                        std::span<std::size_t> out) {
    std::size_t next = 0;
    for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t item = next;; ++item) {
            // subsets starting with `item` at this position
            const std::uint64_t block = binomial(m - item - 1, k - pos - 1);
            if (rank < block) {
                out[pos] = item;
                next = item + 1;
                break;
            }
            rank -= block;
        }
    }
}

} // namespace diver::kernels
