// diver: generate networks, attack opinions, recommend corrective edges, and run
// the iterative correction experiment. Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "diver/experiment.hpp"

namespace {

using Command = std::function<void(const diver::ExperimentConfig&, std::ostream&)>;

struct Subcommand {
    CLI::App* app;
    Command run;
    // flag values keyed by config key; filled by CLI11, applied only when given
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
};

void add_flag(Subcommand& sub, const std::string& flag, const std::string& key,
              const std::string& help) {
    sub.options[key] = sub.app->add_option(flag, sub.flags[key], help + " [" + key + "]");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restore an attacked network's consensus value by recommending new edges"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::map<std::string, Subcommand> subs;

    auto make = [&](const std::string& name, const std::string& help, Command run) -> Subcommand& {
        auto& sub = subs[name];
        sub.app = app.add_subcommand(name, help);
        sub.run = std::move(run);
        sub.app->add_option("--config", config_path, "key = value config file");
        sub.app->add_option("--set", overrides, "extra key=value override (repeatable)");
        add_flag(sub, "--seed", "seed", "top-level seed");
        add_flag(sub, "--threads", "threads", "OpenMP threads; 1 = serial bit-exact mode");
        add_flag(sub, "--out-dir", "out_dir", "output directory");
        add_flag(sub, "--graph", "network.path", "edge-list file (implies network.source=file)");
        add_flag(sub, "--n", "network.n", "generated network size");
        add_flag(sub, "--gamma", "network.gamma", "power-law exponent");
        return sub;
    };

    make("generate", "generate a scale-free network and random opinions", diver::cmd_generate);
    {
        auto& s = make("attack", "apply the attack and write the attacked opinions",
                       diver::cmd_attack);
        add_flag(s, "--targets", "attack.n_targets", "number of attacked users");
        add_flag(s, "--value", "attack.value", "opinion forced on attacked users");
    }
    for (const auto& [name, help, run] :
         std::vector<std::tuple<std::string, std::string, Command>>{
             {"recommend", "recommend up to k corrective edges", diver::cmd_recommend},
             {"run", "iterative edge addition with trajectory and figure data", diver::cmd_run}}) {
        auto& s = make(name, help, run);
        add_flag(s, "--k", "recommend.k", "edges per recommendation");
        add_flag(s, "--n-src", "recommend.n_src", "candidate source count");
        add_flag(s, "--theta", "recommend.theta", "weight of new edges");
        add_flag(s, "--mfpt", "recommend.mfpt", "exact or walk");
        add_flag(s, "--walk-len", "recommend.walk_len", "walk steps, 0 = default law");
        add_flag(s, "--batch", "run.batch", "edges per batch");
        add_flag(s, "--max-edges", "run.max_edges", "edge budget");
        add_flag(s, "--stop-tol", "run.stop_tol", "signed objective threshold");
    }
    {
        auto& s = make("mfpt", "dump exact or walk-estimated mean first passage times",
                       diver::cmd_mfpt);
        add_flag(s, "--mode", "recommend.mfpt", "exact or walk");
        add_flag(s, "--walk-len", "recommend.walk_len", "walk steps, 0 = default law");
        add_flag(s, "--target-fraction", "mfpt.target_fraction", "top-centrality share of targets");
    }
    {
        auto& s = make("gadget", "build and solve the subset-sum reduction instance",
                       diver::cmd_gadget);
        add_flag(s, "--z", "gadget.z", "comma-separated values in [0,1]");
        add_flag(s, "--k", "gadget.k", "subset size");
        add_flag(s, "--s", "gadget.s", "target sum");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& [name, sub] : subs) {
        if (!sub.app->parsed()) {
            continue;
        }
        try {
            diver::KeyValues kv;
            if (!config_path.empty()) {
                kv = diver::KeyValues::load(config_path);
            }
            for (const auto& [key, opt] : sub.options) {
                if (opt->count() > 0) {
                    kv.set(key, sub.flags[key], opt->get_name());
                    if (key == "network.path") {
                        kv.set("network.source", "file", opt->get_name());
                    }
                }
            }
            for (const auto& item : overrides) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) {
                    throw diver::ConfigError("--set expects key=value, got '" + item + "'");
                }
                kv.set(item.substr(0, eq), item.substr(eq + 1), "--set");
            }
            const auto cfg = diver::apply_config({}, kv);
            if (cfg.threads > 0) {
                omp_set_num_threads(cfg.threads);
            }
            sub.run(cfg, std::cout);
        } catch (const diver::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 0;
}
