#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "diver/common.hpp"

namespace diver {

struct Edge {
    NodeId src;
    NodeId dst;
    double weight;
};

/// Row-stochastic sparse directed graph (the appraisal matrix W) in CSR form.
/// Rows are sorted by destination; absent edges have no entry. Immutable once built.
class Graph {
public:
    static constexpr double kRowSumTolerance = 1e-12;
    static constexpr double kLoadRowSumTolerance = 1e-9;

    Graph() = default;

    /// Builds from an unordered edge list. Rejects duplicates, non-positive or >1
    /// weights, out-of-range ids, and rows whose sum deviates from 1 by more than
    /// `row_sum_tol`. Pass a negative tolerance to skip the row-sum check.
    static Graph from_edges(std::size_t n, std::vector<Edge> edges,
                            double row_sum_tol = kRowSumTolerance);

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return cols_.size(); }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {cols_.data() + offsets_[u], cols_.data() + offsets_[u + 1]};
    }
    std::span<const double> weights(NodeId u) const {
        return {weights_.data() + offsets_[u], weights_.data() + offsets_[u + 1]};
    }
    std::size_t out_degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

    /// w_uv, 0 when absent. O(log out-degree).
    double weight(NodeId u, NodeId v) const;
    bool has_edge(NodeId u, NodeId v) const;

    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const NodeId> columns() const { return cols_; }
    std::span<const double> values() const { return weights_; }

    std::vector<Edge> edges() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> cols_;
    std::vector<double> weights_;

    friend Graph replace_row(const Graph&, NodeId, std::span<const NodeId>,
                             std::span<const double>);
};

/// Copy of `g` with row `r` replaced. Other rows compare equal to the input.
Graph replace_row(const Graph& g, NodeId r, std::span<const NodeId> cols,
                  std::span<const double> weights);

struct ValidationReport {
    bool row_stochastic = false;
    double max_row_deviation = 0.0;
    bool strongly_connected = false;
    bool aperiodic = false;
    bool rationally_selfish = false;
    std::vector<NodeId> selfishness_violations;
    bool has_self_loop = false;

    /// True when every precondition of the perturbation formulas holds.
    bool all_ok() const {
        return row_stochastic && strongly_connected && aperiodic && rationally_selfish;
    }
};

ValidationReport validate(const Graph& g);

/// Strongly connected component id per node (Tarjan, iterative).
std::vector<std::size_t> strongly_connected_components(const Graph& g,
                                                       std::size_t* count = nullptr);

/// Period of an irreducible chain: gcd of level(u)+1-level(v) over all edges of a
/// BFS layering. Returns 0 when the graph is not strongly connected.
std::size_t period(const Graph& g);

/// w_rr > w_rj for every j != r.
bool row_is_selfish(const Graph& g, NodeId r);

/// Single directed edge addition with weight theta.
struct EdgePerturbation {
    NodeId r;
    NodeId c;
    double theta;
};

/// Row r becomes (1-theta)*row r plus theta at column c. Throws when the edge
/// already exists, r == c, ids are out of range, or theta is outside (0,1].
Graph add_edge_perturbed(const Graph& g, const EdgePerturbation& p);

void check_perturbation(const Graph& g, const EdgePerturbation& p);

/// Tab-separated `src dst weight` lines; '#' starts a comment line.
Graph read_graph(const std::filesystem::path& path);
void write_graph(const Graph& g, const std::filesystem::path& path);

} // namespace diver
