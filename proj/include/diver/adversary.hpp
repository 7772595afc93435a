#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "diver/common.hpp"
#include "diver/spectral.hpp"

namespace diver {

enum class AttackKind { random_targets, knapsack };

struct AttackSpec {
    AttackKind kind = AttackKind::random_targets;
    std::size_t n_targets = 16;
    std::uint64_t budget = 16;
    double target_value = 1.0;
    /// Per-user positive integer costs; unit costs when absent.
    std::optional<std::vector<std::uint64_t>> costs;
    std::uint64_t seed = 1;
};

/// Sets `n_targets` distinct users, chosen uniformly at random, to `value`.
OpinionVector attack_random(std::span<const double> x, std::size_t n_targets, double value,
                            std::uint64_t seed);

/// Users chosen by the 0-1 knapsack maximizing sum pi_i (1 - x_i) subject to
/// sum costs <= budget. Ties prefer lexicographically smaller id sets.
std::vector<NodeId> knapsack_targets(const CentralityVector& pi, std::span<const double> x,
                                     std::uint64_t budget, std::span<const std::uint64_t> costs);

/// x with the knapsack-selected users set to 1. Empty `costs` means unit costs.
OpinionVector attack_knapsack(const CentralityVector& pi, std::span<const double> x,
                              std::uint64_t budget, std::span<const std::uint64_t> costs = {});

/// Dispatches on spec.kind. `pi` is only consulted for the knapsack attack.
OpinionVector apply_attack(const AttackSpec& spec, const CentralityVector& pi,
                           std::span<const double> x);

} // namespace diver
