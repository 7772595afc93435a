#include "diver/mfpt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "diver/kernels.hpp"

namespace diver {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

MfptTable MfptTable::exact(std::size_t n, std::vector<double> values) {
    if (values.size() != n * n) {
        throw Error("exact MFPT table needs n*n values");
    }
    MfptTable t;
    t.mode_ = Mode::exact;
    t.n_ = n;
    t.full_ = std::move(values);
    return t;
}

MfptTable MfptTable::estimated(std::size_t n, std::vector<NodeId> hubs,
                               std::vector<double> to_hub, std::vector<std::uint64_t> to_count,
                               std::vector<double> from_hub,
                               std::vector<std::uint64_t> from_count) {
    const std::size_t h = hubs.size();
    if (to_hub.size() != n * h || to_count.size() != n * h || from_hub.size() != n * h ||
        from_count.size() != n * h) {
        throw Error("estimated MFPT table: inconsistent dimensions");
    }
    MfptTable t;
    t.mode_ = Mode::estimated;
    t.n_ = n;
    t.hub_pos_.assign(n, -1);
    for (std::size_t q = 0; q < h; ++q) {
        if (hubs[q] >= n || t.hub_pos_[hubs[q]] >= 0) {
            throw Error("estimated MFPT table: hub ids must be distinct and in range");
        }
        t.hub_pos_[hubs[q]] = static_cast<std::int64_t>(q);
    }
    t.hubs_ = std::move(hubs);
    t.to_ = std::move(to_hub);
    t.to_count_ = std::move(to_count);
    t.from_ = std::move(from_hub);
    t.from_count_ = std::move(from_count);
    return t;
}

bool MfptTable::covers(NodeId i, NodeId j) const {
    if (i >= n_ || j >= n_) {
        return false;
    }
    return mode_ == Mode::exact || hub_pos_[i] >= 0 || hub_pos_[j] >= 0;
}

std::optional<double> MfptTable::get(NodeId i, NodeId j) const {
    if (!covers(i, j)) {
        return std::nullopt;
    }
    double v = 0.0;
    if (mode_ == Mode::exact) {
        v = full_[static_cast<std::size_t>(i) * n_ + j];
    } else if (hub_pos_[i] >= 0) {
        // passages out of a hub use every visit of the hub
        v = from_[static_cast<std::size_t>(hub_pos_[i]) * n_ + j];
    } else {
        v = to_[static_cast<std::size_t>(i) * hubs_.size() + static_cast<std::size_t>(hub_pos_[j])];
    }
    if (std::isnan(v)) {
        return std::nullopt;
    }
    return v;
}

double MfptTable::at(NodeId i, NodeId j) const {
    if (auto v = get(i, j)) {
        return *v;
    }
    throw MissingMfpt("MFPT m(" + std::to_string(i) + "," + std::to_string(j) +
                      ") is not available");
}

std::uint64_t MfptTable::samples(NodeId i, NodeId j) const {
    if (mode_ == Mode::exact || !covers(i, j)) {
        return 0;
    }
    if (hub_pos_[i] >= 0) {
        return from_count_[static_cast<std::size_t>(hub_pos_[i]) * n_ + j];
    }
    return to_count_[static_cast<std::size_t>(i) * hubs_.size() +
                     static_cast<std::size_t>(hub_pos_[j])];
}

std::size_t MfptTable::missing_count() const {
    if (mode_ == Mode::exact) {
        return 0;
    }
    std::size_t missing = 0;
    const std::size_t h = hubs_.size();
    for (std::size_t i = 0; i < n_; ++i) {
        if (hub_pos_[i] >= 0) {
            continue;
        }
        for (std::size_t q = 0; q < h; ++q) {
            missing += std::isnan(to_[i * h + q]) ? 1 : 0;
        }
    }
    for (const double v : from_) {
        missing += std::isnan(v) ? 1 : 0;
    }
    return missing;
}

std::vector<NodeId> MfptTable::empty_targets() const {
    std::vector<NodeId> out;
    const std::size_t h = hubs_.size();
    for (std::size_t q = 0; q < h; ++q) {
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            total += to_count_[i * h + q];
        }
        if (total == 0) {
            out.push_back(hubs_[q]);
        }
    }
    return out;
}

std::size_t MfptTable::fill_missing() {
    if (mode_ == Mode::exact) {
        return 0;
    }
    const std::size_t h = hubs_.size();
    // m(i, hub) for hub rows lives in the out-of-hub table
    auto into = [&](std::size_t i, std::size_t q) -> double& {
        return hub_pos_[i] >= 0 ? from_[static_cast<std::size_t>(hub_pos_[i]) * n_ + hubs_[q]]
                                : to_[i * h + q];
    };
    auto out_of = [&](std::size_t q, std::size_t j) -> double& { return from_[q * n_ + j]; };

    // substitutes come from observed entries only, so fill order does not matter
    auto mean = [&](auto&& slot) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < n_; ++k) {
            if (const double v = slot(k); !std::isnan(v)) {
                sum += v;
                ++count;
            }
        }
        return count == 0 ? std::nan("") : static_cast<double>(n_) * sum / static_cast<double>(count);
    };
    std::vector<double> sub_into(h), sub_out(h);
    for (std::size_t q = 0; q < h; ++q) {
        sub_into[q] = mean([&](std::size_t i) { return into(i, q); });
        sub_out[q] = mean([&](std::size_t j) { return out_of(q, j); });
    }

    std::size_t filled = 0;
    auto fill = [&](double& slot, double substitute) {
        if (std::isnan(slot) && !std::isnan(substitute)) {
            slot = substitute;
            ++filled;
        }
    };
    for (std::size_t q = 0; q < h; ++q) {
        for (std::size_t k = 0; k < n_; ++k) {
            fill(into(k, q), sub_into[q]);
            fill(out_of(q, k), sub_out[q]);
        }
    }
    substituted_ += filled;
    return filled;
}

void MfptTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write MFPT table " + path.string());
    }
    out.precision(17);
    out << "i,j,value,samples\n";
    auto emit = [&](NodeId i, NodeId j, bool with_samples) {
        out << i << ',' << j << ',';
        if (auto v = get(i, j)) {
            out << *v;
        }
        out << ',';
        if (with_samples) {
            out << samples(i, j);
        }
        out << '\n';
    };
    if (mode_ == Mode::exact) {
        for (NodeId i = 0; i < n_; ++i) {
            for (NodeId j = 0; j < n_; ++j) {
                emit(i, j, false);
            }
        }
        return;
    }
    for (NodeId i = 0; i < n_; ++i) {
        if (hub_pos_[i] >= 0) {
            for (NodeId j = 0; j < n_; ++j) {
                emit(i, j, true);
            }
        } else {
            for (const NodeId t : hubs_) {
                emit(i, t, true);
            }
        }
    }
}

namespace {

void fundamental_mfpt(const Graph& g, const CentralityVector& pi, Exec exec, std::vector<double>& m) {
    const std::size_t n = g.size();
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd a(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
        for (Eigen::Index j = 0; j < ni; ++j) {
            a(i, j) = pi[static_cast<std::size_t>(j)];
        }
        a(i, i) += 1.0;
        const auto cols = g.neighbors(static_cast<NodeId>(i));
        const auto w = g.weights(static_cast<NodeId>(i));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            a(i, static_cast<Eigen::Index>(cols[k])) -= w[k];
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    if (!(lu.rcond() > 1e-14)) {
        throw Error("fundamental matrix is singular; the chain is not ergodic");
    }
    const Eigen::MatrixXd z = lu.inverse();
    const bool parallel = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index i = 0; i < ni; ++i) {
        for (Eigen::Index j = 0; j < ni; ++j) {
            const double delta = i == j ? 1.0 : 0.0;
            m[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] =
                (delta - z(i, j) + z(j, j)) / pi[static_cast<std::size_t>(j)];
        }
    }
}

} // namespace

MfptTable mfpt_exact(const Graph& g, const CentralityVector& pi, const ExactMfptOptions& opts) {
    const std::size_t n = g.size();
    if (n > opts.dense_cap) {
        throw Error("exact MFPTs limited to n <= " + std::to_string(opts.dense_cap) +
                    " (got n=" + std::to_string(n) + ")");
    }
    if (pi.size() != n) {
        throw Error("centrality vector has wrong dimension");
    }
    std::vector<double> m(n * n);
    fundamental_mfpt(g, pi, opts.exec, m);
    for (const double v : m) {
        if (!std::isfinite(v)) {
            throw Error("fundamental matrix produced non-finite MFPTs");
        }
    }
    return MfptTable::exact(n, std::move(m));
}

std::uint64_t walk_length_default(std::size_t n) {
    const double fitted = (0.197 * static_cast<double>(n) - 2.248) * 1e4;
    const auto floor = static_cast<long long>(10 * n);
    return static_cast<std::uint64_t>(std::max(std::llround(fitted), floor));
}

MfptTable mfpt_estimate(const Graph& g, std::span<const NodeId> targets, const WalkOptions& opts) {
    const std::size_t n = g.size();
    if (targets.empty()) {
        throw Error("MFPT estimation needs at least one target");
    }
    for (const NodeId t : targets) {
        if (t >= n) {
            throw Error("MFPT target out of range");
        }
    }
    const std::uint64_t steps = opts.walk_len == 0 ? walk_length_default(n) : opts.walk_len;
    NodeId start = 0;
    if (opts.start) {
        start = *opts.start;
        if (start >= n) {
            throw Error("walk start out of range");
        }
    } else {
        PowerOptions po;
        po.exec = opts.exec;
        const auto pi = eigencentrality(g, po);
        start = static_cast<NodeId>(std::max_element(pi.values.begin(), pi.values.end()) -
                                    pi.values.begin());
    }

    const auto table = kernels::walk_table(g);
    const auto tallies = opts.exec == Exec::parallel
                             ? kernels::walk_tallies_omp(table, n, targets, start, steps, opts.seed)
                             : kernels::walk_tallies_serial(table, n, targets, start, steps,
                                                            opts.seed);
    const std::size_t h = targets.size();
    std::vector<double> to(n * h, kMissing);
    std::vector<double> from(n * h, kMissing);
    for (std::size_t k = 0; k < n * h; ++k) {
        if (tallies.to_count[k] > 0) {
            to[k] = static_cast<double>(tallies.to_sum[k]) /
                    static_cast<double>(tallies.to_count[k]);
        }
        if (tallies.from_count[k] > 0) {
            from[k] = static_cast<double>(tallies.from_sum[k]) /
                      static_cast<double>(tallies.from_count[k]);
        }
    }
    return MfptTable::estimated(n, {targets.begin(), targets.end()}, std::move(to),
                                tallies.to_count, std::move(from), tallies.from_count);
}

} // namespace diver
