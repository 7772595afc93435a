#include "diver/recommend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "diver/kernels.hpp"
#include "diver/mfpt.hpp"

namespace diver {

void check_config(const RecommenderConfig& cfg, std::size_t n) {
    if (cfg.k < 1) {
        throw Error("recommender needs k >= 1");
    }
    if (cfg.n_src < 1 || cfg.n_src > n) {
        throw Error("recommender needs 1 <= n_src <= n");
    }
    auto theta_ok = [](double t) { return t > 0.0 && t <= 1.0; };
    if (!theta_ok(cfg.theta)) {
        throw Error("theta must lie in (0,1]");
    }
    for (const auto& [edge, t] : cfg.theta_table) {
        if (!theta_ok(t)) {
            throw Error("per-edge theta must lie in (0,1]");
        }
    }
}

std::vector<NodeId> select_sources(const CentralityVector& pi, std::size_t n_src) {
    return top_centrality(pi, n_src);
}

namespace {

std::vector<NodeId> two_hop_destinations(const Graph& g, NodeId r) {
    std::vector<NodeId> first(g.neighbors(r).begin(), g.neighbors(r).end());
    std::vector<NodeId> out;
    for (const NodeId u : first) {
        for (const NodeId v : g.neighbors(u)) {
            if (v != r && !std::binary_search(first.begin(), first.end(), v)) {
                out.push_back(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool ranks_before(const ScoredEdge& a, const ScoredEdge& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.r != b.r ? a.r < b.r : a.c < b.c;
}

std::vector<ScoredEdge> apply_overshoot_policy(const std::vector<ScoredEdge>& ranked, double gap,
                                               const RecommenderConfig& cfg) {
    std::vector<ScoredEdge> out;
    switch (cfg.overshoot) {
    case OvershootPolicy::none:
        out.assign(ranked.begin(),
                   ranked.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.k, ranked.size())));
        return out;
    case OvershootPolicy::skip: {
        double remaining = gap;
        for (const auto& e : ranked) {
            if (out.size() == cfg.k) {
                break;
            }
            if (e.score > 0.0 && e.score <= remaining + cfg.stop_tol) {
                out.push_back(e);
                remaining -= e.score;
            }
        }
        if (!out.empty()) {
            return out;
        }
        [[fallthrough]];
    }
    case OvershootPolicy::closest_fit: {
        const std::size_t limit = cfg.overshoot == OvershootPolicy::skip ? 1 : cfg.k;
        std::vector<bool> taken(ranked.size(), false);
        double remaining = gap;
        while (out.size() < limit) {
            std::size_t best = ranked.size();
            double best_left = std::abs(remaining);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                const double left = std::abs(remaining - ranked[i].score);
                if (!taken[i] && left < best_left) {
                    best = i;
                    best_left = left;
                }
            }
            if (best == ranked.size()) {
                break; // nothing brings the value closer
            }
            taken[best] = true;
            out.push_back(ranked[best]);
            remaining -= ranked[best].score;
        }
        return out;
    }
    }
    return out;
}

void require_valid(const Graph& g) {
    const auto rep = validate(g);
    if (!rep.row_stochastic || !rep.strongly_connected || !rep.aperiodic) {
        std::ostringstream msg;
        msg << "graph fails validation:" << (rep.row_stochastic ? "" : " not row-stochastic")
            << (rep.strongly_connected ? "" : " not strongly connected")
            << (rep.aperiodic ? "" : " periodic");
        throw Error(msg.str());
    }
}

} // namespace

std::vector<ScoredEdge> score_candidates(const Graph& g, const CentralityVector& pi,
                                         const MfptTable& mfpt, std::span<const NodeId> hubs,
                                         std::span<const NodeId> sources,
                                         std::span<const double> x_tilde,
                                         const RecommenderConfig& cfg) {
    const std::size_t n = g.size();
    const bool exact = mfpt.mode() == MfptTable::Mode::exact;
    // dense slices for the scoring kernel
    const std::size_t h = hubs.size();
    std::vector<std::int64_t> hub_index(n, -1);
    for (std::size_t t = 0; t < h; ++t) {
        hub_index[hubs[t]] = static_cast<std::int64_t>(t);
    }
    std::vector<double> to_hub(n * h);
    for (NodeId i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < h; ++t) {
            to_hub[i * h + t] = mfpt.at(i, hubs[t]);
        }
    }
    const std::size_t ns = sources.size();
    std::vector<double> from_src(ns * n);
    std::vector<std::size_t> source_hub(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        const NodeId r = sources[s];
        if (hub_index[r] < 0) {
            throw Error("every candidate source must be among the score hubs");
        }
        source_hub[s] = static_cast<std::size_t>(hub_index[r]);
        for (NodeId j = 0; j < n; ++j) {
            from_src[s * n + j] = mfpt.at(r, j);
        }
    }

    std::vector<kernels::Candidate> cands;
    for (std::size_t s = 0; s < ns; ++s) {
        const NodeId r = sources[s];
        auto consider = [&](NodeId c) {
            if (c != r && !g.has_edge(r, c)) {
                cands.push_back({s, c, cfg.theta_for(r, c)});
            }
        };
        if (cfg.destinations == DestinationScope::two_hop) {
            for (const NodeId c : two_hop_destinations(g, r)) {
                consider(c);
            }
        } else {
            for (NodeId c = 0; c < n; ++c) {
                consider(c);
            }
        }
    }
    if (cands.empty()) {
        throw Error("no admissible candidate edges");
    }

    kernels::ScoringInputs in;
    in.n = n;
    in.pi = pi.values;
    in.x_tilde = x_tilde;
    in.hubs = hubs;
    in.sources = sources;
    in.to_hub = to_hub;
    in.from_src = from_src;
    in.hub_index = hub_index;
    in.source_hub = source_hub;
    std::vector<double> scores(cands.size());
    if (cfg.exec == Exec::parallel) {
        kernels::score_candidates_omp(in, cands, scores);
    } else {
        kernels::score_candidates_serial(in, cands, scores);
    }

    const bool all_terms = h == n;
    std::vector<ScoredEdge> ranked;
    ranked.reserve(cands.size());
    for (std::size_t k = 0; k < cands.size(); ++k) {
        ScoredEdge e;
        e.r = sources[cands[k].source];
        e.c = cands[k].c;
        e.theta = cands[k].theta;
        e.score = scores[k];
        e.mode = all_terms ? ScoreMode::exact : ScoreMode::truncated;
        e.nodes_used = all_terms ? n : h + (hub_index[e.c] < 0 ? 1 : 0);
        e.estimated = !exact;
        ranked.push_back(e);
    }
    std::sort(ranked.begin(), ranked.end(), ranks_before);
    return ranked;
}

Recommendation recommend_against(const Graph& g, const CentralityVector& pi,
                                 std::span<const double> x_tilde, double target_value,
                                 const RecommenderConfig& cfg) {
    const std::size_t n = g.size();
    check_config(cfg, n);
    if (x_tilde.size() != n || pi.size() != n) {
        throw Error("dimension mismatch between graph, centrality and opinions");
    }

    Recommendation rec;
    auto& stats = rec.stats;
    stats.gap = consensus_value(pi, x_tilde) - target_value;
    if (!(stats.gap > cfg.stop_tol)) {
        return rec; // nothing to correct
    }

    for (const NodeId r : select_sources(pi, cfg.n_src)) {
        (row_is_selfish(g, r) ? stats.sources : stats.dropped_sources).push_back(r);
    }

    const bool exact = cfg.mfpt == MfptSource::exact;
    std::size_t subset = cfg.score_subset_size;
    if (subset == 0) {
        subset = exact ? n : cfg.n_src;
    }
    const auto hubs = top_centrality(pi, std::max(subset, cfg.n_src));
    stats.hubs = hubs.size();

    MfptTable mfpt;
    if (exact) {
        ExactMfptOptions eo;
        eo.exec = cfg.exec;
        mfpt = mfpt_exact(g, pi, eo);
    } else {
        WalkOptions wo;
        wo.walk_len = cfg.walk_len == 0 ? walk_length_default(n) : cfg.walk_len;
        wo.seed = cfg.walk_seed;
        wo.start = hubs.front();
        wo.exec = cfg.exec;
        stats.walk_len = wo.walk_len;
        mfpt = mfpt_estimate(g, hubs, wo);
        stats.substituted_mfpts = mfpt.fill_missing();
    }

    std::vector<double> centered;
    if (cfg.center_opinions) {
        const double mean = consensus_value(pi, x_tilde);
        centered.reserve(n);
        for (const double v : x_tilde) {
            centered.push_back(v - mean);
        }
        x_tilde = centered;
    }
    rec.ranked = score_candidates(g, pi, mfpt, hubs, stats.sources, x_tilde, cfg);
    stats.candidates = rec.ranked.size();
    rec.edges = apply_overshoot_policy(rec.ranked, stats.gap, cfg);
    return rec;
}

Recommendation recommend(const Graph& g, std::span<const double> x,
                         std::span<const double> x_tilde, const RecommenderConfig& cfg) {
    if (x.size() != g.size() || x_tilde.size() != g.size()) {
        throw Error("opinion vectors do not match the graph size");
    }
    require_valid(g);
    PowerOptions po;
    po.exec = cfg.exec;
    const auto pi = eigencentrality(g, po);
    return recommend_against(g, pi, x_tilde, consensus_value(pi, x), cfg);
}

Trajectory run_diver(const Graph& g, std::span<const double> x, std::span<const double> x_tilde,
                     const RecommenderConfig& cfg, const RunLimits& limits) {
    using clock = std::chrono::steady_clock;
    if (limits.batch < 1) {
        throw Error("batch size must be >= 1");
    }
    if (x.size() != g.size() || x_tilde.size() != g.size()) {
        throw Error("opinion vectors do not match the graph size");
    }
    require_valid(g);
    PowerOptions po;
    po.exec = cfg.exec;
    auto pi = eigencentrality(g, po);
    const double target = consensus_value(pi, x);

    Trajectory traj;
    traj.initial_objective = consensus_value(pi, x_tilde) - target;
    traj.final_graph = g;
    double objective = traj.initial_objective;
    std::size_t total = 0;
    int stalled = 0;

    RecommenderConfig round_cfg = cfg;
    round_cfg.stop_tol = limits.stop_tol;
    while (!(objective < limits.stop_tol) && total < limits.max_edges) {
        const auto t0 = clock::now();
        require_valid(traj.final_graph);
        round_cfg.k = std::min(limits.batch, limits.max_edges - total);
        const auto rec = recommend_against(traj.final_graph, pi, x_tilde, target, round_cfg);
        if (rec.edges.empty()) {
            break;
        }
        double predicted = objective;
        for (const auto& e : rec.edges) {
            traj.final_graph = add_edge_perturbed(traj.final_graph, {e.r, e.c, e.theta});
            predicted -= e.score;
        }
        total += rec.edges.size();
        pi = eigencentrality(traj.final_graph, po);
        const double next = consensus_value(pi, x_tilde) - target;

        BatchRecord b;
        b.batch = traj.batches.size() + 1;
        b.edges = rec.edges;
        b.edges_added_total = total;
        b.objective_signed = predicted;
        b.objective_exact = next;
        b.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        traj.batches.push_back(std::move(b));

        stalled = next >= objective ? stalled + 1 : 0;
        objective = next;
        if (stalled >= 3) {
            traj.aborted = true;
            std::ostringstream msg;
            msg.precision(12);
            msg << "objective failed to decrease for 3 consecutive batches (now " << objective
                << " after " << total << " edges)";
            traj.diagnostic = msg.str();
            break;
        }
    }
    return traj;
}

void write_trajectory(const Trajectory& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write trajectory " + path.string());
    }
    out.precision(17);
    out << "batch,edges_added_total,objective_signed,objective_exact,seconds\n";
    for (const auto& b : t.batches) {
        out << b.batch << ',' << b.edges_added_total << ',' << b.objective_signed << ','
            << b.objective_exact << ',' << b.seconds << '\n';
    }
}

} // namespace diver
