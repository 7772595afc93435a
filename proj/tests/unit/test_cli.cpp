#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "diver/config.hpp"

using namespace diver;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Result {
    int code;
    std::string out;
};

Result run_cli(const std::string& args) {
    const auto log = fs::temp_directory_path() / "diver_cli_log.txt";
    const std::string cmd = std::string(DIVER_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

fs::path scratch(const char* name) {
    const auto p = fs::temp_directory_path() / "diver_cli_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing and diagnostics") {
    const auto kv = KeyValues::parse("# comment\nseed = 9  # trailing\n\nrecommend.n_src=7\n", "t");
    const auto cfg = apply_config({}, kv);
    CHECK(cfg.seed == 9);
    CHECK(cfg.recommender.n_src == 7);
    CHECK(cfg.n == 250); // untouched default

    CHECK_THROWS_WITH_AS(KeyValues::parse("seed 9\n", "f"), doctest::Contains("f:1"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(KeyValues::parse("seed = 1\nseed = 2\n", "f"),
                         doctest::Contains("f:2"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config({}, KeyValues::parse("\nnope = 1\n", "f")),
                         doctest::Contains("f:2: unknown key 'nope'"), ConfigError);
    CHECK_THROWS_WITH_AS(apply_config({}, KeyValues::parse("network.n = ten\n", "f")),
                         doctest::Contains("'network.n'"), ConfigError);
    CHECK_THROWS_AS(apply_config({}, KeyValues::parse("recommend.mfpt = fast\n", "f")),
                    ConfigError);
    CHECK_THROWS_AS(apply_config({}, KeyValues::parse("attack.value = 2\n", "f")), ConfigError);
    CHECK_THROWS_AS(apply_config({}, KeyValues::parse("output.figures = maybe\n", "f")),
                    ConfigError);
}

TEST_CASE("config text round-trips") {
    ExperimentConfig cfg;
    cfg.seed = 42;
    cfg.gamma = -2.1;
    cfg.limits.stop_tol = 1e-9;
    cfg.recommender.overshoot = OvershootPolicy::closest_fit;
    cfg.gadget_z = {0.125, 0.3};
    const auto text = cfg.to_text();
    const auto back = apply_config({}, KeyValues::parse(text, "archived"));
    CHECK(back.to_text() == text);
    CHECK(back.gamma == -2.1);
    CHECK(back.component_seed("walk") != back.component_seed("attack"));
}

TEST_CASE("usage and domain errors map to exit codes") {
    const auto dir = scratch("codes");
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("generate --bogus 1").code == 2);
    {
        std::ofstream cfg(dir / "bad.conf");
        cfg << "seed = 1\nrecommend.k = many\n";
    }
    const auto bad = run_cli("generate --config " + (dir / "bad.conf").string());
    CHECK(bad.code == 2);
    CHECK(bad.out.find("bad.conf:2") != std::string::npos);
    CHECK(run_cli("generate --graph " + (dir / "missing.tsv").string() + " --out-dir " +
                  dir.string())
              .code == 1);
    CHECK(run_cli("gadget --z 0.2,1.5 --k 1 --s 0.5 --out-dir " + dir.string()).code == 1);
}

TEST_CASE("flags override the config file") {
    const auto dir = scratch("precedence");
    {
        std::ofstream cfg(dir / "exp.conf");
        cfg << "seed = 5\nnetwork.n = 40\n";
    }
    const auto r = run_cli("generate --config " + (dir / "exp.conf").string() + " --seed 7 --out-dir " +
                           dir.string());
    REQUIRE(r.code == 0);
    const auto archived = slurp(dir / "config.txt");
    CHECK(archived.find("seed = 7\n") != std::string::npos);
    CHECK(archived.find("network.n = 40\n") != std::string::npos);
}

TEST_CASE("gadget reports objective 0 and the witness") {
    const auto dir = scratch("gadget");
    const auto r = run_cli("gadget --z 0.2,0.3,0.5 --k 2 --s 0.5 --out-dir " + dir.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("objective 0 ") != std::string::npos);
    CHECK(r.out.find("witness {0.2,0.3}") != std::string::npos);
    CHECK(fs::exists(dir / "gadget_graph.tsv"));
}

TEST_CASE("recommend with unattacked opinions writes an empty recommendation") {
    const auto dir = scratch("noattack");
    REQUIRE(run_cli("generate --n 60 --out-dir " + dir.string()).code == 0);
    const auto r = run_cli("recommend --graph " + (dir / "graph.tsv").string() +
                           " --set opinions.path=" + (dir / "opinions.tsv").string() +
                           " --set opinions.attacked_path=" + (dir / "opinions.tsv").string() +
                           " --out-dir " + (dir / "rec").string());
    REQUIRE(r.code == 0);
    CHECK(slurp(dir / "rec" / "recommendations.csv") == "r,c,theta,score,mode\n");
}

TEST_CASE("mfpt and attack commands") {
    const auto dir = scratch("mfpt");
    REQUIRE(run_cli("mfpt --n 50 --mode walk --out-dir " + dir.string()).code == 0);
    CHECK(slurp(dir / "mfpt.csv").rfind("i,j,value,samples\n", 0) == 0);
    REQUIRE(run_cli("attack --n 50 --targets 5 --out-dir " + dir.string()).code == 0);
    CHECK(fs::exists(dir / "attacked.tsv"));
}

TEST_CASE("archived config reproduces byte-identical output in serial mode") {
    const auto dir = scratch("repro");
    const std::string common = " --n 120 --threads 1 --max-edges 20 --set output.timings=false";
    REQUIRE(run_cli("run" + common + " --out-dir " + (dir / "a").string()).code == 0);
    REQUIRE(run_cli("run --config " + (dir / "a" / "config.txt").string() + " --out-dir " +
                    (dir / "b").string())
                .code == 0);
    for (const char* f : {"trajectory.csv", "added_edges.csv", "fig_score_vs_source.csv",
                          "fig_truncation.csv", "fig_walk_convergence.csv", "final_graph.tsv"}) {
        INFO(f);
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK_FALSE(slurp(dir / "a" / f).empty());
    }
}

} // TEST_SUITE
