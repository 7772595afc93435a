#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "diver/graph.hpp"

namespace diver {

/// l1-normalized dominant left eigenvector of W, i.e. the stationary distribution.
struct CentralityVector {
    std::vector<double> values;
    /// ||pi^T W - pi^T||_1 of `values`.
    double residual = 0.0;
    std::size_t iterations = 0;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct PowerOptions {
    double tol = 1e-12;
    std::size_t max_iter = 10'000;
    Exec exec = Exec::parallel;
    /// Iteration start; uniform 1/n when empty.
    std::optional<std::vector<double>> start;
};

/// Power method with l1 normalization every iteration. Stops at the first iterate whose
/// residual is <= tol and returns that iterate. Throws Error when max_iter is reached.
CentralityVector eigencentrality(const Graph& g, const PowerOptions& opts = {});

/// <pi, x>.
double consensus_value(std::span<const double> pi, std::span<const double> x);
inline double consensus_value(const CentralityVector& pi, std::span<const double> x) {
    return consensus_value(pi.values, x);
}

/// `node<TAB>value` lines; '#' comments. Every node 0..n-1 must appear exactly once.
std::vector<double> read_vector(const std::filesystem::path& path);
void write_vector(std::span<const double> v, const std::filesystem::path& path);

} // namespace diver
