#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "diver/config.hpp"
#include "diver/mfpt.hpp"

namespace diver {

// Building blocks shared by the commands; every random choice uses a seed derived
// from cfg.seed with a fixed component label.
Graph load_network(const ExperimentConfig& cfg);
OpinionVector initial_opinions(const ExperimentConfig& cfg, std::size_t n);
OpinionVector attacked_opinions(const ExperimentConfig& cfg, const Graph& g,
                                std::span<const double> x);
RecommenderConfig recommender_for(const ExperimentConfig& cfg);

/// Score of every admissible edge from every selfish source, exact MFPTs:
/// CSV `r,c,pi_r,score`.
void write_score_vs_source(const Graph& g, const CentralityVector& pi,
                           std::span<const double> x_tilde, const RecommenderConfig& rc,
                           const std::filesystem::path& path);

/// Truncated vs exact scores over growing top-centrality subsets for a sample of edges:
/// CSV `r,c,pi_r,subset_size,nodes_used,truncated_score,exact_score`.
void write_truncation_curves(const Graph& g, const CentralityVector& pi,
                             std::span<const double> x_tilde, const RecommenderConfig& rc,
                             const std::filesystem::path& path);

struct ConvergencePoint {
    std::uint64_t walk_len = 0;
    std::size_t entries = 0;
    std::size_t missing = 0;
    double median_rel_error = 0.0;
    double frac_within_5pct = 0.0;
};

/// Relative error of walk estimates against `exact` over every (i, t) with t in targets.
ConvergencePoint estimate_accuracy(const MfptTable& estimate, const MfptTable& exact,
                                   std::span<const NodeId> targets);

/// Estimator accuracy for MFPTs to the top-5% nodes across walk lengths:
/// CSV `walk_len,entries,missing,median_rel_error,frac_within_5pct`.
void write_walk_convergence(const Graph& g, const CentralityVector& pi, std::uint64_t seed,
                            Exec exec, const std::filesystem::path& path);

// Subcommands. Each archives its effective config as config.txt in cfg.out_dir and
// throws Error (or ConfigError) on failure.
void cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_attack(const ExperimentConfig& cfg, std::ostream& log);
void cmd_recommend(const ExperimentConfig& cfg, std::ostream& log);
void cmd_run(const ExperimentConfig& cfg, std::ostream& log);
void cmd_mfpt(const ExperimentConfig& cfg, std::ostream& log);
void cmd_gadget(const ExperimentConfig& cfg, std::ostream& log);

} // namespace diver
