#include "diver/perturb.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace diver {

const char* to_string(ScoreMode m) {
    return m == ScoreMode::exact ? "exact" : "truncated";
}

namespace {

void check_preconditions(const Graph& g, const CentralityVector& pi, const EdgePerturbation& p,
                         bool force) {
    check_perturbation(g, p);
    if (pi.size() != g.size()) {
        throw Error("centrality vector has wrong dimension");
    }
    if (!force && !row_is_selfish(g, p.r)) {
        throw AssumptionViolated("row " + std::to_string(p.r) +
                                 " is not rationally selfish (w_rr must exceed every w_rj)");
    }
}

struct Denominator {
    double m_rr;
    double value;
};

Denominator denominator(const MfptTable& m, const EdgePerturbation& p) {
    const double m_rr = m.at(p.r, p.r);
    const double m_cr = m.at(p.c, p.r);
    return {m_rr, m_rr + p.theta * (m_cr - m_rr + 1.0)};
}

} // namespace

CentralityVector perturbed_centrality(const Graph& g, const CentralityVector& pi,
                                      const MfptTable& mfpt, const EdgePerturbation& p,
                                      bool force) {
    check_preconditions(g, pi, p, force);
    const std::size_t n = g.size();
    const double denom = denominator(mfpt, p).value;
    CentralityVector out;
    out.values.resize(n);
    for (NodeId j = 0; j < n; ++j) {
        const double m_cj = j == p.c ? 0.0 : mfpt.at(p.c, j);
        const double m_rj = mfpt.at(p.r, j);
        out.values[j] = pi[j] * (1.0 - p.theta * (m_cj - m_rj + 1.0) / denom);
    }
    return out;
}

ScoredEdge edge_score(const Graph& g, const CentralityVector& pi, const MfptTable& mfpt,
                      const EdgePerturbation& p, std::span<const double> x_tilde,
                      std::optional<std::span<const NodeId>> subset, bool force) {
    check_preconditions(g, pi, p, force);
    const std::size_t n = g.size();
    if (x_tilde.size() != n) {
        throw Error("opinion vector has wrong dimension");
    }

    std::vector<NodeId> nodes;
    if (subset) {
        nodes.assign(subset->begin(), subset->end());
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        if (!std::binary_search(nodes.begin(), nodes.end(), p.r) ||
            !std::binary_search(nodes.begin(), nodes.end(), p.c)) {
            throw Error("truncated score subset must contain both edge endpoints");
        }
        if (nodes.back() >= n) {
            throw Error("truncated score subset out of range");
        }
    } else {
        nodes.resize(n);
        std::iota(nodes.begin(), nodes.end(), NodeId{0});
    }

    double numer = 0.0;
    for (const NodeId j : nodes) {
        const double m_cj = j == p.c ? 0.0 : mfpt.at(p.c, j);
        numer += pi[j] * (m_cj - mfpt.at(p.r, j) + 1.0) * x_tilde[j];
    }
    ScoredEdge e;
    e.r = p.r;
    e.c = p.c;
    e.theta = p.theta;
    e.score = p.theta * numer / denominator(mfpt, p).value;
    e.nodes_used = nodes.size();
    e.mode = nodes.size() == n ? ScoreMode::exact : ScoreMode::truncated;
    e.estimated = mfpt.mode() == MfptTable::Mode::estimated;
    return e;
}

std::vector<NodeId> top_centrality(const CentralityVector& pi, std::size_t count) {
    std::vector<NodeId> order(pi.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    count = std::min(count, order.size());
    const auto by_centrality = [&](NodeId a, NodeId b) {
        return pi[a] != pi[b] ? pi[a] > pi[b] : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count),
                      order.end(), by_centrality);
    order.resize(count);
    return order;
}

std::vector<NodeId> truncation_subset(const CentralityVector& pi, std::size_t count, NodeId r,
                                      NodeId c) {
    auto nodes = top_centrality(pi, count);
    for (const NodeId extra : {r, c}) {
        if (std::find(nodes.begin(), nodes.end(), extra) == nodes.end()) {
            nodes.push_back(extra);
        }
    }
    return nodes;
}

void write_scores(std::span<const ScoredEdge> edges, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write scores " + path.string());
    }
    out.precision(17);
    out << "r,c,theta,score,mode\n";
    for (const auto& e : edges) {
        out << e.r << ',' << e.c << ',' << e.theta << ',' << e.score << ',' << to_string(e.mode)
            << '\n';
    }
}

} // namespace diver
