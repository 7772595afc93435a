#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diver/graph.hpp"
#include "diver/perturb.hpp"
#include "diver/spectral.hpp"

namespace diver {

enum class DestinationScope { all_nodes, two_hop };

/// What to do with candidates whose predicted reduction would overshoot the gap.
///   skip         walk candidates by score, keep those that fit the remaining gap;
///                when none fits, fall back to the single closest fit
///   closest_fit  repeatedly take the candidate leaving the smallest |remaining gap|
///   none         plain top-k by score
enum class OvershootPolicy { skip, closest_fit, none };

enum class MfptSource { exact, walk };

struct RecommenderConfig {
    std::size_t k = 5;
    std::size_t n_src = 25;
    double theta = 0.1;
    /// Per-edge weights overriding `theta`.
    std::map<std::pair<NodeId, NodeId>, double> theta_table;
    DestinationScope destinations = DestinationScope::all_nodes;
    MfptSource mfpt = MfptSource::exact;
    std::uint64_t walk_len = 0; ///< 0 selects walk_length_default(n)
    std::uint64_t walk_seed = 1;
    /// Top-centrality nodes kept in the score sum. 0 means every node with exact MFPTs
    /// and n_src nodes with walk estimates.
    std::size_t score_subset_size = 0;
    OvershootPolicy overshoot = OvershootPolicy::skip;
    /// Score against x~ - <pi, x~>. The full score sum is unchanged (its weights sum to
    /// zero), but truncated and walk-estimated sums lose their common-mode error.
    bool center_opinions = true;
    double stop_tol = 1e-8;
    Exec exec = Exec::parallel;

    double theta_for(NodeId r, NodeId c) const {
        const auto it = theta_table.find({r, c});
        return it == theta_table.end() ? theta : it->second;
    }
};

void check_config(const RecommenderConfig& cfg, std::size_t n);

struct RecommendStats {
    /// <pi, x~> minus the value being restored.
    double gap = 0.0;
    std::vector<NodeId> sources;
    /// Top-centrality nodes skipped because their row is not rationally selfish.
    std::vector<NodeId> dropped_sources;
    std::size_t candidates = 0;
    std::size_t hubs = 0;
    /// Missing walk estimates replaced by the n * mean rule.
    std::size_t substituted_mfpts = 0;
    std::uint64_t walk_len = 0;
};

struct Recommendation {
    std::vector<ScoredEdge> edges;
    /// Every scored candidate, best first.
    std::vector<ScoredEdge> ranked;
    RecommendStats stats;
};

/// The `n_src` nodes of largest centrality, descending, ties by ascending id.
std::vector<NodeId> select_sources(const CentralityVector& pi, std::size_t n_src);

/// Scores every admissible edge (r, c) with r in `sources`, using MFPTs from `mfpt` and
/// summing over `hubs` (every node when hubs.size() == n, which gives exact scores).
/// `hubs` must contain every source. Result is sorted by score desc, r asc, c asc.
std::vector<ScoredEdge> score_candidates(const Graph& g, const CentralityVector& pi,
                                         const MfptTable& mfpt, std::span<const NodeId> hubs,
                                         std::span<const NodeId> sources,
                                         std::span<const double> x_tilde,
                                         const RecommenderConfig& cfg);

/// Edge recommendation for the current graph against a fixed value to restore
/// (`target_value` = <pi_original, x>). `pi` must be the centrality of `g`.
Recommendation recommend_against(const Graph& g, const CentralityVector& pi,
                                 std::span<const double> x_tilde, double target_value,
                                 const RecommenderConfig& cfg);

/// Full pipeline on one graph: validate, compute pi, score candidates, pick up to k edges.
Recommendation recommend(const Graph& g, std::span<const double> x,
                         std::span<const double> x_tilde, const RecommenderConfig& cfg);

inline std::vector<ScoredEdge> recommend_edges(const Graph& g, std::span<const double> x,
                                               std::span<const double> x_tilde,
                                               const RecommenderConfig& cfg) {
    return recommend(g, x, x_tilde, cfg).edges;
}

struct BatchRecord {
    std::size_t batch = 0;
    std::vector<ScoredEdge> edges;
    std::size_t edges_added_total = 0;
    /// Objective predicted from the closed-form scores before applying the batch.
    double objective_signed = 0.0;
    /// <pi~, x~> - <pi, x> recomputed by the power method after the batch.
    double objective_exact = 0.0;
    double seconds = 0.0;
};

struct Trajectory {
    double initial_objective = 0.0;
    std::vector<BatchRecord> batches;
    Graph final_graph;
    bool aborted = false;
    std::string diagnostic;

    double final_objective() const {
        return batches.empty() ? initial_objective : batches.back().objective_exact;
    }
    std::size_t edges_added() const {
        return batches.empty() ? 0 : batches.back().edges_added_total;
    }
};

struct RunLimits {
    std::size_t batch = 5;
    std::size_t max_edges = 180;
    double stop_tol = 1e-8;
};

/// Adds edges in batches until the signed objective drops below stop_tol or max_edges
/// is reached, recomputing centrality and MFPTs after every batch. Stops with
/// `aborted` set when the objective fails to decrease for 3 consecutive batches.
Trajectory run_diver(const Graph& g, std::span<const double> x, std::span<const double> x_tilde,
                     const RecommenderConfig& cfg, const RunLimits& limits);

/// CSV `batch,edges_added_total,objective_signed,objective_exact,seconds`.
void write_trajectory(const Trajectory& t, const std::filesystem::path& path);

} // namespace diver
