#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "diver/graph.hpp"

namespace diver {

using NodePair = std::pair<NodeId, NodeId>;

enum class EdgeApplication {
    /// Directed edge with weight theta, row r rescaled by (1 - theta).
    perturb_theta,
    /// Undirected edge: both directions added, rows of both endpoints re-weighted uniformly.
    undirected_uniform,
};

struct BruteForceOptions {
    double theta = 0.1;
    EdgeApplication application = EdgeApplication::perturb_theta;
    std::uint64_t subset_cap = 1'000'000;
    Exec exec = Exec::parallel;
};

struct BruteForceResult {
    /// Chosen edges in lexicographic order.
    std::vector<NodePair> edges;
    double objective = 0.0;
    std::uint64_t subsets = 0;
};

/// Adds undirected edges {a, b} and gives every touched row uniform weights.
Graph add_undirected_uniform(const Graph& g, std::span<const NodePair> pairs);

/// Exhaustive DIVER: the k-subset of `candidates` minimizing |<pi~, x~> - <pi, x>| where
/// pi~ is recomputed by the power method. Ties go to the lexicographically first subset
/// of the (sorted) candidate list.
BruteForceResult brute_force_diver(const Graph& g, std::size_t k, std::span<const double> x,
                                   std::span<const double> x_tilde,
                                   std::span<const NodePair> candidates,
                                   const BruteForceOptions& opts = {});

/// The subset-sum reduction network: a uniformly weighted 2n-clique minus the perfect
/// matching {(2i, 2i+1)}, with opinions x~ = z (x) 1_2 and x = (s 1 + m x~) / (m + k).
struct GadgetInstance {
    std::vector<double> z;
    std::size_t k = 0;
    double s = 0.0;
    /// Undirected edge count 2n^2 - 2n.
    std::size_t m = 0;
    /// Absent for n = 1, where the clique has no edges.
    std::optional<Graph> graph;
    OpinionVector x;
    OpinionVector x_tilde;
    /// The n matching edges, as (2i, 2i+1).
    std::vector<NodePair> candidate_edges;

    std::size_t nodes() const { return 2 * z.size(); }
};

GadgetInstance build_gadget(std::vector<double> z, std::size_t k, double s);

struct GadgetCheck {
    /// |<pi~, x~> - <pi, x>| from the degree formula pi = d / 2m on the augmented graph.
    double lhs = 0.0;
    /// |sum of chosen z - s| / (m + k).
    double rhs = 0.0;
};

/// `chosen` holds indices into candidate_edges; exactly k of them.
GadgetCheck verify_gadget(const GadgetInstance& inst, std::span<const std::size_t> chosen);

struct GadgetSolution {
    std::vector<std::size_t> chosen; ///< matching-edge indices
    double objective = 0.0;
};

/// Exhaustive search over the matching edges of a gadget, recomputing pi by the
/// power method (degree formula for n = 1, which has no base graph).
GadgetSolution solve_gadget(const GadgetInstance& inst, Exec exec = Exec::parallel);

} // namespace diver
