#include "diver/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "diver/generate.hpp"
#include "diver/oracle.hpp"

namespace diver {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.precision(17);
    return out;
}

void archive(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    auto out = open_csv(cfg.out_dir / "config.txt");
    out << cfg.to_text();
}

std::vector<std::uint64_t> read_costs(const std::filesystem::path& path) {
    std::vector<std::uint64_t> costs;
    for (const double v : read_vector(path)) {
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) {
            throw Error("attack costs must be positive integers (" + path.string() + ")");
        }
        costs.push_back(static_cast<std::uint64_t>(v));
    }
    return costs;
}

PowerOptions power_options(const ExperimentConfig& cfg) {
    PowerOptions po;
    po.exec = cfg.exec();
    return po;
}

} // namespace

Graph load_network(const ExperimentConfig& cfg) {
    if (cfg.network == NetworkSource::file) {
        if (cfg.network_path.empty()) {
            throw ConfigError("network.source = file needs network.path");
        }
        return read_graph(cfg.network_path);
    }
    ScaleFreeParams p;
    p.n = cfg.n;
    p.gamma = cfg.gamma;
    p.seed = cfg.component_seed("network");
    p.self_loop_floor = cfg.self_loop_floor;
    return generate_scale_free(p);
}

OpinionVector initial_opinions(const ExperimentConfig& cfg, std::size_t n) {
    if (!cfg.opinions_path.empty()) {
        auto x = read_vector(cfg.opinions_path);
        if (x.size() != n) {
            throw Error("opinion file has " + std::to_string(x.size()) + " entries, graph has " +
                        std::to_string(n) + " nodes");
        }
        return x;
    }
    std::mt19937_64 rng(cfg.component_seed("opinions"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    OpinionVector x(n);
    for (auto& v : x) {
        v = unit(rng);
    }
    return x;
}

OpinionVector attacked_opinions(const ExperimentConfig& cfg, const Graph& g,
                                std::span<const double> x) {
    if (!cfg.attacked_path.empty()) {
        auto xt = read_vector(cfg.attacked_path);
        if (xt.size() != g.size()) {
            throw Error("attacked opinion file does not match the graph size");
        }
        return xt;
    }
    AttackSpec spec = cfg.attack;
    spec.seed = cfg.component_seed("attack");
    if (!cfg.attack_costs_path.empty()) {
        spec.costs = read_costs(cfg.attack_costs_path);
    }
    CentralityVector pi;
    if (spec.kind == AttackKind::knapsack) {
        pi = eigencentrality(g, power_options(cfg));
    }
    return apply_attack(spec, pi, x);
}

RecommenderConfig recommender_for(const ExperimentConfig& cfg) {
    RecommenderConfig rc = cfg.recommender;
    rc.exec = cfg.exec();
    rc.walk_seed = cfg.component_seed("walk");
    rc.stop_tol = cfg.limits.stop_tol;
    if (!cfg.theta_table_path.empty()) {
        rc.theta_table = read_theta_table(cfg.theta_table_path);
    }
    return rc;
}

void write_score_vs_source(const Graph& g, const CentralityVector& pi,
                           std::span<const double> x_tilde, const RecommenderConfig& rc,
                           const std::filesystem::path& path) {
    const std::size_t n = g.size();
    ExactMfptOptions eo;
    eo.exec = rc.exec;
    const auto mfpt = mfpt_exact(g, pi, eo);
    const auto hubs = top_centrality(pi, n);
    std::vector<NodeId> sources;
    for (const NodeId r : hubs) {
        if (row_is_selfish(g, r)) {
            sources.push_back(r);
        }
    }
    auto out = open_csv(path);
    out << "r,c,pi_r,score\n";
    for (const auto& e : score_candidates(g, pi, mfpt, hubs, sources, x_tilde, rc)) {
        out << e.r << ',' << e.c << ',' << pi[e.r] << ',' << e.score << '\n';
    }
}

void write_truncation_curves(const Graph& g, const CentralityVector& pi,
                             std::span<const double> x_tilde, const RecommenderConfig& rc,
                             const std::filesystem::path& path) {
    const std::size_t n = g.size();
    ExactMfptOptions eo;
    eo.exec = rc.exec;
    const auto mfpt = mfpt_exact(g, pi, eo);
    const auto hubs = top_centrality(pi, n);
    std::vector<NodeId> sources;
    for (const NodeId r : select_sources(pi, rc.n_src)) {
        if (row_is_selfish(g, r)) {
            sources.push_back(r);
        }
    }
    const auto ranked = score_candidates(g, pi, mfpt, hubs, sources, x_tilde, rc);

    // the 10 best edges plus 10 spread over the rest of the ranking
    std::vector<std::size_t> picks;
    for (std::size_t i = 0; i < std::min<std::size_t>(10, ranked.size()); ++i) {
        picks.push_back(i);
    }
    if (ranked.size() > 10) {
        const std::size_t rest = ranked.size() - 10;
        for (std::size_t q = 1; q <= 10; ++q) {
            picks.push_back(std::min(ranked.size() - 1, 10 + q * rest / 10 - (q == 10 ? 1 : 0)));
        }
    }
    picks.erase(std::unique(picks.begin(), picks.end()), picks.end());

    const double fractions[] = {0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0};
    auto out = open_csv(path);
    out << "r,c,pi_r,subset_size,nodes_used,truncated_score,exact_score\n";
    for (const std::size_t i : picks) {
        const auto& e = ranked[i];
        for (const double f : fractions) {
            const auto size = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n)));
            const auto subset = truncation_subset(pi, size, e.r, e.c);
            const auto t = edge_score(g, pi, mfpt, {e.r, e.c, e.theta}, x_tilde,
                                      std::span<const NodeId>(subset), true);
            out << e.r << ',' << e.c << ',' << pi[e.r] << ',' << size << ',' << t.nodes_used << ','
                << t.score << ',' << e.score << '\n';
        }
    }
}

ConvergencePoint estimate_accuracy(const MfptTable& estimate, const MfptTable& exact,
                                   std::span<const NodeId> targets) {
    ConvergencePoint p;
    std::vector<double> errors;
    std::size_t within = 0;
    for (NodeId i = 0; i < exact.size(); ++i) {
        for (const NodeId t : targets) {
            ++p.entries;
            const auto v = estimate.get(i, t);
            if (!v) {
                ++p.missing;
                continue;
            }
            const double truth = exact.at(i, t);
            const double rel = std::abs(*v - truth) / truth;
            errors.push_back(rel);
            within += rel <= 0.05 ? 1 : 0;
        }
    }
    if (!errors.empty()) {
        const auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
        std::nth_element(errors.begin(), mid, errors.end());
        p.median_rel_error = *mid;
    }
    p.frac_within_5pct = p.entries == 0 ? 0.0
                                        : static_cast<double>(within) /
                                              static_cast<double>(p.entries);
    return p;
}

void write_walk_convergence(const Graph& g, const CentralityVector& pi, std::uint64_t seed,
                            Exec exec, const std::filesystem::path& path) {
    const std::size_t n = g.size();
    ExactMfptOptions eo;
    eo.exec = exec;
    const auto exact = mfpt_exact(g, pi, eo);
    const auto top = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
    const auto targets = top_centrality(pi, std::max<std::size_t>(1, top));
    const std::uint64_t base = walk_length_default(n);

    auto out = open_csv(path);
    out << "walk_len,entries,missing,median_rel_error,frac_within_5pct\n";
    for (const double scale : {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0}) {
        WalkOptions wo;
        wo.walk_len = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(scale * static_cast<double>(base))));
        wo.seed = seed;
        wo.start = targets.front();
        wo.exec = exec;
        const auto p = estimate_accuracy(mfpt_estimate(g, targets, wo), exact, targets);
        out << wo.walk_len << ',' << p.entries << ',' << p.missing << ',' << p.median_rel_error
            << ',' << p.frac_within_5pct << '\n';
    }
}

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto g = load_network(cfg);
    const auto x = initial_opinions(cfg, g.size());
    write_graph(g, cfg.out_dir / "graph.tsv");
    write_vector(x, cfg.out_dir / "opinions.tsv");
    const auto rep = validate(g);
    log << "generated n=" << g.size() << " edges=" << g.edge_count()
        << " valid=" << (rep.all_ok() ? "yes" : "no") << '\n';
}

void cmd_attack(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto g = load_network(cfg);
    const auto x = initial_opinions(cfg, g.size());
    const auto xt = attacked_opinions(cfg, g, x);
    write_vector(xt, cfg.out_dir / "attacked.tsv");
    const auto pi = eigencentrality(g, power_options(cfg));
    std::size_t changed = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        changed += x[i] != xt[i] ? 1 : 0;
    }
    log.precision(12);
    log << "attack changed " << changed << " opinions; consensus " << consensus_value(pi, x)
        << " -> " << consensus_value(pi, xt) << '\n';
}

void cmd_recommend(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto g = load_network(cfg);
    const auto x = initial_opinions(cfg, g.size());
    const auto xt = attacked_opinions(cfg, g, x);
    const auto rec = recommend(g, x, xt, recommender_for(cfg));
    write_scores(rec.edges, cfg.out_dir / "recommendations.csv");
    log.precision(12);
    log << "gap " << rec.stats.gap << "; " << rec.stats.candidates << " candidates from "
        << rec.stats.sources.size() << " sources; recommended " << rec.edges.size() << " edges\n";
    if (!rec.stats.dropped_sources.empty()) {
        log << "skipped " << rec.stats.dropped_sources.size()
            << " sources violating rational selfishness\n";
    }
    if (rec.stats.substituted_mfpts > 0) {
        log << "warning: " << rec.stats.substituted_mfpts
            << " MFPT estimates had no samples and were substituted\n";
    }
}

void cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto g = load_network(cfg);
    const auto x = initial_opinions(cfg, g.size());
    const auto xt = attacked_opinions(cfg, g, x);
    write_graph(g, cfg.out_dir / "graph.tsv");
    write_vector(x, cfg.out_dir / "opinions.tsv");
    write_vector(xt, cfg.out_dir / "attacked.tsv");

    const auto rc = recommender_for(cfg);
    auto traj = run_diver(g, x, xt, rc, cfg.limits);
    if (!cfg.timings) {
        for (auto& b : traj.batches) {
            b.seconds = 0.0;
        }
    }
    write_trajectory(traj, cfg.out_dir / "trajectory.csv");
    write_graph(traj.final_graph, cfg.out_dir / "final_graph.tsv");
    {
        auto out = open_csv(cfg.out_dir / "added_edges.csv");
        out << "batch,r,c,theta,score,mode,estimated\n";
        for (const auto& b : traj.batches) {
            for (const auto& e : b.edges) {
                out << b.batch << ',' << e.r << ',' << e.c << ',' << e.theta << ',' << e.score
                    << ',' << to_string(e.mode) << ',' << (e.estimated ? 1 : 0) << '\n';
            }
        }
    }

    log.precision(12);
    log << "initial objective " << traj.initial_objective << "; final " << traj.final_objective()
        << " after " << traj.edges_added() << " edges in " << traj.batches.size() << " batches\n";
    if (traj.aborted) {
        log << "aborted: " << traj.diagnostic << '\n';
    }

    if (!cfg.figures) {
        return;
    }
    if (g.size() > ExactMfptOptions{}.dense_cap) {
        log << "figure data skipped: exact MFPTs unavailable for n=" << g.size() << '\n';
        return;
    }
    const auto pi = eigencentrality(g, power_options(cfg));
    write_score_vs_source(g, pi, xt, rc, cfg.out_dir / "fig_score_vs_source.csv");
    write_truncation_curves(g, pi, xt, rc, cfg.out_dir / "fig_truncation.csv");
    write_walk_convergence(g, pi, cfg.component_seed("figures.walk"), cfg.exec(),
                           cfg.out_dir / "fig_walk_convergence.csv");
}

void cmd_mfpt(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto g = load_network(cfg);
    const auto pi = eigencentrality(g, power_options(cfg));
    MfptTable table;
    if (cfg.recommender.mfpt == MfptSource::exact) {
        ExactMfptOptions eo;
        eo.exec = cfg.exec();
        table = mfpt_exact(g, pi, eo);
    } else {
        if (!(cfg.mfpt_target_fraction > 0.0 && cfg.mfpt_target_fraction <= 1.0)) {
            throw ConfigError("mfpt.target_fraction must lie in (0,1]");
        }
        const auto count = static_cast<std::size_t>(
            std::ceil(cfg.mfpt_target_fraction * static_cast<double>(g.size())));
        const auto targets = top_centrality(pi, std::max<std::size_t>(1, count));
        WalkOptions wo;
        wo.walk_len = cfg.recommender.walk_len;
        wo.seed = cfg.component_seed("walk");
        wo.start = targets.front();
        wo.exec = cfg.exec();
        table = mfpt_estimate(g, targets, wo);
        const auto empty = table.empty_targets();
        if (!empty.empty()) {
            log << "warning: " << empty.size() << " targets received no samples; walk too short\n";
        }
        log << "walk of " << (wo.walk_len == 0 ? walk_length_default(g.size()) : wo.walk_len)
            << " steps, " << targets.size() << " targets, " << table.missing_count()
            << " missing entries\n";
    }
    table.write_csv(cfg.out_dir / "mfpt.csv");
    log << "wrote " << (cfg.out_dir / "mfpt.csv").string() << '\n';
}

void cmd_gadget(const ExperimentConfig& cfg, std::ostream& log) {
    archive(cfg);
    const auto inst = build_gadget(cfg.gadget_z, cfg.gadget_k, cfg.gadget_s);
    if (inst.graph) {
        write_graph(*inst.graph, cfg.out_dir / "gadget_graph.tsv");
    }
    write_vector(inst.x, cfg.out_dir / "gadget_x.tsv");
    write_vector(inst.x_tilde, cfg.out_dir / "gadget_x_tilde.tsv");

    const auto sol = solve_gadget(inst, cfg.exec());
    const auto check = verify_gadget(inst, sol.chosen);
    auto out = open_csv(cfg.out_dir / "gadget_solution.csv");
    out << "edge,a,b,z\n";
    for (const std::size_t i : sol.chosen) {
        const auto [a, b] = inst.candidate_edges[i];
        out << i << ',' << a << ',' << b << ',' << inst.z[i] << '\n';
    }

    log.precision(12);
    log << "objective " << (sol.objective <= 1e-10 ? 0.0 : sol.objective) << " (raw "
        << sol.objective << ", closed form " << check.rhs << ")\nwitness {";
    for (std::size_t q = 0; q < sol.chosen.size(); ++q) {
        log << (q ? "," : "") << inst.z[sol.chosen[q]];
    }
    log << "}\n";
}

} // namespace diver
