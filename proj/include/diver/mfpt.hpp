#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "diver/graph.hpp"
#include "diver/spectral.hpp"

namespace diver {

/// Mean first passage times m_ij, either the full exact matrix or random-walk estimates
/// to and from a small set of hub nodes.
///
/// Estimated tables cover m(i, t) and m(t, j) for every hub t and all nodes i, j.
/// Entries whose passage was never observed are missing until fill_missing() runs.
class MfptTable {
public:
    enum class Mode { exact, estimated };

    /// Row-major n x n matrix; diagonal holds mean first return times.
    static MfptTable exact(std::size_t n, std::vector<double> values);
    /// Estimated table assembled from tallies; `hubs` lists the tallied hubs in order.
    static MfptTable estimated(std::size_t n, std::vector<NodeId> hubs,
                               std::vector<double> to_hub, std::vector<std::uint64_t> to_count,
                               std::vector<double> from_hub,
                               std::vector<std::uint64_t> from_count);

    Mode mode() const { return mode_; }
    std::size_t size() const { return n_; }
    /// Hub ids (estimated mode only).
    std::span<const NodeId> targets() const { return hubs_; }
    std::int64_t hub_position(NodeId v) const { return hub_pos_.empty() ? -1 : hub_pos_[v]; }

    /// True when the table has a slot for (i, j), observed or not.
    bool covers(NodeId i, NodeId j) const;
    /// m_ij; nullopt when not covered or never observed.
    std::optional<double> get(NodeId i, NodeId j) const;
    /// m_ij; throws MissingMfpt when unavailable.
    double at(NodeId i, NodeId j) const;
    /// Number of passages averaged into (i, j); 0 in exact mode.
    std::uint64_t samples(NodeId i, NodeId j) const;

    /// Covered entries with zero samples.
    std::size_t missing_count() const;
    /// Hubs for which no passage at all was observed (walk too short).
    std::vector<NodeId> empty_targets() const;

    /// Replaces each missing entry by n times the mean observed value of its hub column
    /// (or hub row, for passages out of a hub). Returns the number of substitutions.
    std::size_t fill_missing();
    std::size_t substituted() const { return substituted_; }

    void write_csv(const std::filesystem::path& path) const;

private:
    Mode mode_ = Mode::exact;
    std::size_t n_ = 0;
    std::vector<double> full_;               // exact: n x n
    std::vector<NodeId> hubs_;               // estimated
    std::vector<std::int64_t> hub_pos_;      // node -> hub index or -1
    std::vector<double> to_;                 // n x hubs, NaN = missing
    std::vector<std::uint64_t> to_count_;
    std::vector<double> from_;               // hubs x n, NaN = missing
    std::vector<std::uint64_t> from_count_;
    std::size_t substituted_ = 0;
};

struct ExactMfptOptions {
    std::size_t dense_cap = 2'000;
    Exec exec = Exec::parallel;
};

/// Fundamental-matrix route: Z = (I - W + 1 pi^T)^{-1}, m_ij = (delta_ij - z_ij + z_jj) / pi_j.
/// Throws when n exceeds the dense cap or the system is singular.
MfptTable mfpt_exact(const Graph& g, const CentralityVector& pi,
                     const ExactMfptOptions& opts = {});

/// Walk length sufficient for MFPTs to and from top-centrality nodes in scale-free
/// networks: max(round((0.197 n - 2.248) 1e4), 10 n).
std::uint64_t walk_length_default(std::size_t n);

struct WalkOptions {
    std::uint64_t walk_len = 0; ///< 0 selects walk_length_default(n)
    std::uint64_t seed = 1;
    /// Walk start; the node of largest centrality when unset.
    std::optional<NodeId> start;
    Exec exec = Exec::parallel;
};

/// One seeded random walk; estimates m(i, t) and m(t, j) for every hub t in `targets`.
MfptTable mfpt_estimate(const Graph& g, std::span<const NodeId> targets,
                        const WalkOptions& opts);

} // namespace diver
