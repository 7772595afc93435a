#pragma once

// Hot loops of the pipeline, each in two flavours:
//   *_serial  straightforward reference kept for testing and bit-exact runs
//   *_omp     OpenMP kernel; may reorganize the arithmetic for throughput
// tests/test_kernels.cpp checks every pair against each other.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "diver/graph.hpp"

namespace diver::kernels {

/// Column-major (transposed) copy of a graph: in-neighbors of each node.
struct Transpose {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> rows;
    std::vector<double> weights;
};

Transpose transpose(const Graph& g);

/// y = x^T W by scattering each row of W (reference).
void left_multiply_serial(const Graph& g, std::span<const double> x, std::span<double> y);
/// y = x^T W by gathering over in-neighbors, parallel over destination nodes.
void left_multiply_omp(const Transpose& t, std::span<const double> x, std::span<double> y);

double sum_serial(std::span<const double> x);
double sum_omp(std::span<const double> x);
double l1_distance_serial(std::span<const double> a, std::span<const double> b);
double l1_distance_omp(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Candidate edge scoring.

/// Dense MFPT slices consumed by the scorer.
///   to_hub[i * hubs.size() + h] = m(i, hubs[h])         for every node i
///   from_src[s * n + j]         = m(sources[s], j)      for every node j
/// Every source must also be a hub, and the truncation set is `hubs`.
struct ScoringInputs {
    std::size_t n = 0;
    std::span<const double> pi;
    std::span<const double> x_tilde;
    std::span<const NodeId> hubs;
    std::span<const NodeId> sources;
    std::span<const double> to_hub;
    std::span<const double> from_src;
    /// Position of each node in `hubs`, or -1.
    std::span<const std::int64_t> hub_index;
    /// Position of each source in `hubs`.
    std::span<const std::size_t> source_hub;
};

struct Candidate {
    std::size_t source; ///< index into ScoringInputs::sources
    NodeId c;
    double theta;
};

/// Edge score restricted to j in hubs ∪ {r, c}: direct summation per candidate.
void score_candidates_serial(const ScoringInputs& in, std::span<const Candidate> cands,
                             std::span<double> scores);
/// Same value via per-source and per-destination partial sums, parallel over candidates.
void score_candidates_omp(const ScoringInputs& in, std::span<const Candidate> cands,
                          std::span<double> scores);

// ---------------------------------------------------------------------------
// Random-walk MFPT accumulation.

/// Integer accumulators filled from one walk. All sums are in steps.
struct WalkTallies {
    std::size_t n = 0;
    std::size_t hubs = 0;
    /// Passages i -> hub h, first visit of i per h-excursion; index i * hubs + h.
    std::vector<std::int64_t> to_sum;
    std::vector<std::uint64_t> to_count;
    /// Passages hub h -> j over every visit of h; index h * n + j.
    std::vector<std::int64_t> from_sum;
    std::vector<std::uint64_t> from_count;
    /// Visits per node over the walk.
    std::vector<std::uint64_t> visits;
};

/// One cell of a walk row. A row is a header cell {row total, edge count} followed by
/// its edges {cumulative weight, target, index of the target's header}, so a
/// transition reads one contiguous run of memory and needs no separate offset lookup.
struct WalkCell {
    double cumulative;
    NodeId next;
    std::uint32_t row;
};

/// Row-wise cumulative weights for sampling the next state. The self-loop, when
/// present, leads its row so that staying put touches only the current cache line.
struct WalkTable {
    std::vector<WalkCell> cells;
    std::vector<std::uint32_t> row_of; ///< header index of each node
};

WalkTable walk_table(const Graph& g);

/// Simulates `steps` transitions from `start` and tallies passages to and from `hubs`.
/// One pass, O(steps * |hubs|).
WalkTallies walk_tallies_serial(const WalkTable& t, std::size_t n, std::span<const NodeId> hubs,
                                NodeId start, std::uint64_t steps, std::uint64_t seed);
/// Same tallies (bit-identical): the path is generated in chunks and each chunk is
/// replayed for blocks of nodes in parallel.
WalkTallies walk_tallies_omp(const WalkTable& t, std::size_t n, std::span<const NodeId> hubs,
                             NodeId start, std::uint64_t steps, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Exhaustive k-subset minimization.

/// Number of k-subsets of m items, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t m, std::uint64_t k);

/// k-subset with lexicographic rank `rank` among subsets of {0..m-1}.
void unrank_combination(std::uint64_t rank, std::size_t m, std::size_t k,
                        std::span<std::size_t> out);

struct SubsetMin {
    std::uint64_t rank = 0;
    double value = 0.0;
};

/// Minimum of `objective` over all k-subsets; ties keep the lowest rank.
/// The callable must be thread-safe for the parallel flavour.
template <class F>
SubsetMin min_over_subsets_serial(std::size_t m, std::size_t k, F&& objective);
template <class F>
SubsetMin min_over_subsets_omp(std::size_t m, std::size_t k, F&& objective);

} // namespace diver::kernels

#include "diver/kernels_subsets.inl"
