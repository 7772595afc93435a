#include "diver/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace diver {

namespace {

constexpr double kOverlayWeight = 1e-3;
constexpr double kSelfLoopMax = 0.9;

std::vector<std::size_t> sample_degrees(std::size_t n, std::size_t dmin, std::size_t dmax,
                                        double gamma, std::mt19937_64& rng) {
    std::vector<double> pmf;
    pmf.reserve(dmax - dmin + 1);
    for (std::size_t d = dmin; d <= dmax; ++d) {
        pmf.push_back(std::pow(static_cast<double>(d), gamma));
    }
    std::discrete_distribution<std::size_t> dist(pmf.begin(), pmf.end());
    std::vector<std::size_t> deg(n);
    for (auto& d : deg) {
        d = dmin + dist(rng);
    }
    return deg;
}

// Grow the smaller stub total until in- and out-stubs balance.
void balance(std::vector<std::size_t>& out_deg, std::vector<std::size_t>& in_deg,
             std::size_t dmax, std::mt19937_64& rng) {
    auto total = [](const std::vector<std::size_t>& v) {
        return std::accumulate(v.begin(), v.end(), std::size_t{0});
    };
    std::size_t so = total(out_deg);
    std::size_t si = total(in_deg);
    std::uniform_int_distribution<std::size_t> pick(0, out_deg.size() - 1);
    while (so != si) {
        auto& grow = so < si ? out_deg : in_deg;
        const std::size_t i = pick(rng);
        if (grow[i] < dmax) {
            ++grow[i];
            (so < si ? so : si) += 1;
        }
    }
}

} // namespace

Graph generate_scale_free(const ScaleFreeParams& params) {
    const std::size_t n = params.n;
    if (n < 2) {
        throw Error("scale-free generator needs n >= 2");
    }
    if (!(params.gamma < -1.0)) {
        throw Error("scale-free exponent gamma must be < -1");
    }
    if (!(params.self_loop_floor > 0.0 && 0.5 + params.self_loop_floor < kSelfLoopMax)) {
        throw Error("self_loop_floor must lie in (0, 0.4)");
    }
    std::mt19937_64 rng(params.seed);

    const std::size_t dmax = n - 1;
    const std::size_t dmin = std::min<std::size_t>(2, dmax);
    auto out_deg = sample_degrees(n, dmin, dmax, params.gamma, rng);
    auto in_deg = sample_degrees(n, dmin, dmax, params.gamma, rng);
    balance(out_deg, in_deg, dmax, rng);

    std::vector<NodeId> out_stubs;
    std::vector<NodeId> in_stubs;
    for (NodeId i = 0; i < n; ++i) {
        out_stubs.insert(out_stubs.end(), out_deg[i], i);
        in_stubs.insert(in_stubs.end(), in_deg[i], i);
    }
    std::shuffle(in_stubs.begin(), in_stubs.end(), rng);

    std::vector<std::vector<NodeId>> nbrs(n);
    for (std::size_t k = 0; k < out_stubs.size(); ++k) {
        if (out_stubs[k] != in_stubs[k]) {
            nbrs[out_stubs[k]].push_back(in_stubs[k]);
        }
    }
    for (auto& row : nbrs) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }

    // Connectivity check on the unweighted structure (self-loops do not matter for SCCs).
    std::vector<Edge> skeleton;
    for (NodeId i = 0; i < n; ++i) {
        for (const NodeId j : nbrs[i]) {
            skeleton.push_back({i, j, 1.0});
        }
    }
    std::size_t ncomp = 0;
    strongly_connected_components(Graph::from_edges(n, skeleton, -1.0), &ncomp);

    std::vector<std::vector<NodeId>> overlay(n);
    if (ncomp != 1) {
        std::vector<NodeId> perm(n);
        std::iota(perm.begin(), perm.end(), NodeId{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t k = 0; k < n; ++k) {
            const NodeId a = perm[k];
            const NodeId b = perm[(k + 1) % n];
            if (!std::binary_search(nbrs[a].begin(), nbrs[a].end(), b)) {
                overlay[a].push_back(b);
            }
        }
    }

    std::uniform_real_distribution<double> self_dist(0.5 + params.self_loop_floor, kSelfLoopMax);
    std::vector<Edge> edges;
    edges.reserve(skeleton.size() + 2 * n);
    std::vector<Edge> row;
    for (NodeId i = 0; i < n; ++i) {
        row.clear();
        const double self = self_dist(rng);
        row.push_back({i, i, self});
        const double rest = 1.0 - self;
        if (!nbrs[i].empty()) {
            const double share = rest / static_cast<double>(nbrs[i].size());
            for (const NodeId j : nbrs[i]) {
                row.push_back({i, j, share});
            }
            for (const NodeId j : overlay[i]) {
                row.push_back({i, j, kOverlayWeight});
            }
        } else {
            // only overlay edges leave this node; they carry the whole remainder
            const double share = rest / static_cast<double>(overlay[i].size());
            for (const NodeId j : overlay[i]) {
                row.push_back({i, j, share});
            }
        }
        double total = 0.0;
        for (const auto& e : row) {
            total += e.weight;
        }
        for (auto& e : row) {
            e.weight /= total;
        }
        // Close the row on the self-loop so the exact sum is 1 to half an ulp. A few ulps
        // of row-sum drift times MFPTs near 1e6 breaks first-step identities at 1e-9.
        long double others = 0.0L;
        for (std::size_t k = 1; k < row.size(); ++k) {
            others += row[k].weight;
        }
        row[0].weight = static_cast<double>(1.0L - others);
        edges.insert(edges.end(), row.begin(), row.end());
    }
    return Graph::from_edges(n, std::move(edges));
}

} // namespace diver
