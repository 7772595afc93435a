#include "diver/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "diver/kernels.hpp"
#include "diver/spectral.hpp"

namespace diver {

Graph add_undirected_uniform(const Graph& g, std::span<const NodePair> pairs) {
    const std::size_t n = g.size();
    std::vector<std::vector<NodeId>> rows(n);
    std::vector<bool> touched(n, false);
    for (NodeId u = 0; u < n; ++u) {
        rows[u].assign(g.neighbors(u).begin(), g.neighbors(u).end());
    }
    for (const auto& [a, b] : pairs) {
        if (a >= n || b >= n || a == b) {
            throw Error("undirected edge endpoints must be distinct valid nodes");
        }
        for (const auto& [u, v] : {NodePair{a, b}, NodePair{b, a}}) {
            auto& row = rows[u];
            const auto pos = std::lower_bound(row.begin(), row.end(), v);
            if (pos != row.end() && *pos == v) {
                throw Error("edge " + std::to_string(u) + "->" + std::to_string(v) +
                            " already present");
            }
            row.insert(pos, v);
            touched[u] = true;
        }
    }
    std::vector<Edge> edges;
    edges.reserve(g.edge_count() + 2 * pairs.size());
    for (NodeId u = 0; u < n; ++u) {
        if (touched[u]) {
            const double w = 1.0 / static_cast<double>(rows[u].size());
            for (const NodeId v : rows[u]) {
                edges.push_back({u, v, w});
            }
        } else {
            const auto cols = g.neighbors(u);
            const auto ws = g.weights(u);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                edges.push_back({u, cols[k], ws[k]});
            }
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

BruteForceResult brute_force_diver(const Graph& g, std::size_t k, std::span<const double> x,
                                   std::span<const double> x_tilde,
                                   std::span<const NodePair> candidates,
                                   const BruteForceOptions& opts) {
    const std::size_t n = g.size();
    if (x.size() != n || x_tilde.size() != n) {
        throw Error("opinion vectors do not match the graph size");
    }
    std::vector<NodePair> cand(candidates.begin(), candidates.end());
    std::sort(cand.begin(), cand.end());
    if (std::adjacent_find(cand.begin(), cand.end()) != cand.end()) {
        throw Error("duplicate candidate edge");
    }
    if (k > cand.size()) {
        throw Error("fewer candidate edges than k");
    }
    const std::uint64_t subsets = kernels::binomial(cand.size(), k);
    if (subsets > opts.subset_cap) {
        throw Error("brute force needs " + std::to_string(subsets) + " subsets, cap is " +
                    std::to_string(opts.subset_cap));
    }

    PowerOptions base_opts;
    base_opts.exec = opts.exec;
    const double target = consensus_value(eigencentrality(g, base_opts), x);

    // inner power iterations stay serial; the subset loop carries the parallelism
    PowerOptions inner;
    inner.exec = Exec::serial;
    auto objective = [&](std::span<const std::size_t> subset) {
        Graph h;
        if (opts.application == EdgeApplication::undirected_uniform) {
            std::vector<NodePair> chosen;
            for (const std::size_t i : subset) {
                chosen.push_back(cand[i]);
            }
            h = add_undirected_uniform(g, chosen);
        } else {
            h = g;
            for (const std::size_t i : subset) {
                h = add_edge_perturbed(h, {cand[i].first, cand[i].second, opts.theta});
            }
        }
        return std::abs(consensus_value(eigencentrality(h, inner), x_tilde) - target);
    };

    const auto best = opts.exec == Exec::parallel
                          ? kernels::min_over_subsets_omp(cand.size(), k, objective)
                          : kernels::min_over_subsets_serial(cand.size(), k, objective);
    std::vector<std::size_t> idx(k);
    kernels::unrank_combination(best.rank, cand.size(), k, idx);
    BruteForceResult out;
    for (const std::size_t i : idx) {
        out.edges.push_back(cand[i]);
    }
    out.objective = best.value;
    out.subsets = subsets;
    return out;
}

GadgetInstance build_gadget(std::vector<double> z, std::size_t k, double s) {
    const std::size_t n = z.size();
    if (n == 0) {
        throw Error("gadget needs at least one z value");
    }
    for (const double v : z) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw Error("gadget z values must lie in [0,1]");
        }
    }
    if (!(s >= 0.0 && s <= 1.0)) {
        throw Error("gadget target sum s must lie in [0,1]");
    }
    if (k < 1 || k > n) {
        throw Error("gadget needs 1 <= k <= n");
    }

    GadgetInstance inst;
    inst.z = std::move(z);
    inst.k = k;
    inst.s = s;
    inst.m = 2 * n * n - 2 * n;
    const std::size_t nodes = 2 * n;
    if (inst.m > 0) {
        const double w = 1.0 / static_cast<double>(nodes - 2);
        std::vector<Edge> edges;
        edges.reserve(2 * inst.m);
        for (NodeId u = 0; u < nodes; ++u) {
            for (NodeId v = 0; v < nodes; ++v) {
                if (u != v && u / 2 != v / 2) {
                    edges.push_back({u, v, w});
                }
            }
        }
        inst.graph = Graph::from_edges(nodes, std::move(edges));
    }
    const double m = static_cast<double>(inst.m);
    const double mk = m + static_cast<double>(k);
    inst.x_tilde.resize(nodes);
    inst.x.resize(nodes);
    for (std::size_t u = 0; u < nodes; ++u) {
        inst.x_tilde[u] = inst.z[u / 2];
        inst.x[u] = (s + m * inst.x_tilde[u]) / mk;
    }
    for (NodeId i = 0; i < n; ++i) {
        inst.candidate_edges.push_back({2 * i, 2 * i + 1});
    }
    return inst;
}

GadgetCheck verify_gadget(const GadgetInstance& inst, std::span<const std::size_t> chosen) {
    const std::size_t n = inst.z.size();
    if (chosen.size() != inst.k) {
        throw Error("gadget check needs exactly k chosen edges");
    }
    std::vector<bool> used(n, false);
    for (const std::size_t i : chosen) {
        if (i >= n || used[i]) {
            throw Error("chosen edges must be distinct matching edges");
        }
        used[i] = true;
    }

    const std::size_t nodes = inst.nodes();
    std::vector<double> degree(nodes, static_cast<double>(nodes - 2));
    const double m = static_cast<double>(inst.m);
    const double mk = m + static_cast<double>(inst.k);

    // base centrality d / 2m; uniform when the base graph has no edges (x is constant then)
    double before = 0.0;
    for (std::size_t u = 0; u < nodes; ++u) {
        const double pi = inst.m > 0 ? degree[u] / (2.0 * m) : 1.0 / static_cast<double>(nodes);
        before += pi * inst.x[u];
    }
    for (const std::size_t i : chosen) {
        degree[2 * i] += 1.0;
        degree[2 * i + 1] += 1.0;
    }
    double after = 0.0;
    for (std::size_t u = 0; u < nodes; ++u) {
        after += degree[u] / (2.0 * mk) * inst.x_tilde[u];
    }

    double sum = 0.0;
    for (const std::size_t i : chosen) {
        sum += inst.z[i];
    }
    return {std::abs(after - before), std::abs(sum - inst.s) / mk};
}

GadgetSolution solve_gadget(const GadgetInstance& inst, Exec exec) {
    GadgetSolution sol;
    if (!inst.graph) {
        sol.chosen = {0};
        sol.objective = verify_gadget(inst, sol.chosen).lhs;
        return sol;
    }
    BruteForceOptions opts;
    opts.application = EdgeApplication::undirected_uniform;
    opts.exec = exec;
    const auto res =
        brute_force_diver(*inst.graph, inst.k, inst.x, inst.x_tilde, inst.candidate_edges, opts);
    for (const auto& [a, b] : res.edges) {
        sol.chosen.push_back(a / 2);
    }
    sol.objective = res.objective;
    return sol;
}

} // namespace diver
