#include "diver/adversary.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "diver/seed.hpp"

namespace diver {

OpinionVector attack_random(std::span<const double> x, std::size_t n_targets, double value,
                            std::uint64_t seed) {
    if (n_targets > x.size()) {
        throw Error("cannot attack " + std::to_string(n_targets) + " users out of " +
                    std::to_string(x.size()));
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error("attack value must lie in [0,1]");
    }
    std::vector<NodeId> ids(x.size());
    std::iota(ids.begin(), ids.end(), NodeId{0});
    std::mt19937_64 rng(derive_seed(seed, "attack.random"));
    // partial Fisher-Yates: the first n_targets slots are a uniform sample
    for (std::size_t i = 0; i < n_targets; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    OpinionVector out(x.begin(), x.end());
    for (std::size_t i = 0; i < n_targets; ++i) {
        out[ids[i]] = value;
    }
    return out;
}

std::vector<NodeId> knapsack_targets(const CentralityVector& pi, std::span<const double> x,
                                     std::uint64_t budget, std::span<const std::uint64_t> costs) {
    const std::size_t n = x.size();
    if (pi.size() != n) {
        throw Error("centrality and opinion vectors differ in size");
    }
    std::vector<std::uint64_t> unit;
    if (costs.empty()) {
        unit.assign(n, 1);
        costs = unit;
    }
    if (costs.size() != n) {
        throw Error("knapsack costs must list one cost per user");
    }

    // zero-value users (already at 1) never enter the table
    std::vector<NodeId> items;
    std::uint64_t total_cost = 0;
    for (NodeId i = 0; i < n; ++i) {
        if (costs[i] == 0) {
            throw Error("knapsack costs must be positive");
        }
        if (pi[i] * (1.0 - x[i]) > 0.0 && costs[i] <= budget) {
            items.push_back(i);
            total_cost += costs[i];
        }
    }
    const std::size_t cap = static_cast<std::size_t>(std::min(budget, total_cost));
    const std::size_t m = items.size();

    // best[b] over the suffix items[k..]; take[k][b] records the decision
    std::vector<double> best(cap + 1, 0.0);
    std::vector<std::vector<bool>> take(m, std::vector<bool>(cap + 1, false));
    for (std::size_t k = m; k-- > 0;) {
        const NodeId i = items[k];
        const double value = pi[i] * (1.0 - x[i]);
        const auto c = static_cast<std::size_t>(costs[i]);
        for (std::size_t b = cap + 1; b-- > c;) {
            const double with = value + best[b - c];
            // ties (up to summation-order rounding) keep the lower id
            if (with >= best[b] - 1e-13 * best[b]) {
                best[b] = with;
                take[k][b] = true;
            }
        }
    }
    std::vector<NodeId> chosen;
    std::size_t b = cap;
    for (std::size_t k = 0; k < m; ++k) {
        if (take[k][b]) {
            chosen.push_back(items[k]);
            b -= static_cast<std::size_t>(costs[items[k]]);
        }
    }
    return chosen;
}

OpinionVector attack_knapsack(const CentralityVector& pi, std::span<const double> x,
                              std::uint64_t budget, std::span<const std::uint64_t> costs) {
    OpinionVector out(x.begin(), x.end());
    for (const NodeId i : knapsack_targets(pi, x, budget, costs)) {
        out[i] = 1.0;
    }
    return out;
}

OpinionVector apply_attack(const AttackSpec& spec, const CentralityVector& pi,
                           std::span<const double> x) {
    if (spec.kind == AttackKind::random_targets) {
        return attack_random(x, spec.n_targets, spec.target_value, spec.seed);
    }
    const std::span<const std::uint64_t> costs =
        spec.costs ? std::span<const std::uint64_t>(*spec.costs) : std::span<const std::uint64_t>();
    return attack_knapsack(pi, x, spec.budget, costs);
}

} // namespace diver
