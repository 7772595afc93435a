#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "diver/graph.hpp"
#include "diver/mfpt.hpp"
#include "diver/spectral.hpp"

namespace diver {

enum class ScoreMode { exact, truncated };

const char* to_string(ScoreMode m);

/// Candidate edge with its predicted consensus-value reduction f(r, c).
struct ScoredEdge {
    NodeId r = 0;
    NodeId c = 0;
    double theta = 0.0;
    double score = 0.0;
    ScoreMode mode = ScoreMode::exact;
    /// Number of summation terms; equals n in exact mode.
    std::size_t nodes_used = 0;
    /// Computed from walk-estimated MFPTs.
    bool estimated = false;
};

/// Centrality after adding edge (r, c) with weight theta, in closed form:
///   pi~_j = pi_j [1 - theta (m_cj (1 - [j == c]) - m_rj + 1) / (m_rr + theta (m_cr - m_rr + 1))]
/// Requires w_rc = 0 and a rationally selfish row r (unless `force`).
/// Throws MissingMfpt when M lacks m(c, .) or m(r, .) entries.
CentralityVector perturbed_centrality(const Graph& g, const CentralityVector& pi,
                                      const MfptTable& mfpt, const EdgePerturbation& p,
                                      bool force = false);

/// f(r, c) = <pi, x~> - <pi~, x~>
///         = theta sum_j pi_j (m_cj (1 - [j == c]) - m_rj + 1) x~_j / (m_rr + theta (m_cr - m_rr + 1)).
/// With no subset the sum runs over every node (exact mode); otherwise only over the
/// given nodes, which must include r and c.
ScoredEdge edge_score(const Graph& g, const CentralityVector& pi, const MfptTable& mfpt,
                      const EdgePerturbation& p, std::span<const double> x_tilde,
                      std::optional<std::span<const NodeId>> subset = std::nullopt,
                      bool force = false);

/// Nodes sorted by decreasing centrality, ties by id; at most `count` of them.
std::vector<NodeId> top_centrality(const CentralityVector& pi, std::size_t count);

/// The `count` most central nodes plus r and c.
std::vector<NodeId> truncation_subset(const CentralityVector& pi, std::size_t count, NodeId r,
                                      NodeId c);

/// CSV `r,c,theta,score,mode`.
void write_scores(std::span<const ScoredEdge> edges, const std::filesystem::path& path);

} // namespace diver
