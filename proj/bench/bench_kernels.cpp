// Serial reference vs OpenMP kernel, side by side. Thread count follows OMP_NUM_THREADS.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "diver/generate.hpp"
#include "diver/kernels.hpp"

using namespace diver;

namespace {

Graph bench_graph(std::size_t n) {
    ScaleFreeParams p;
    p.n = n;
    p.seed = 1;
    return generate_scale_free(p);
}

std::vector<double> uniform_vector(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

void BM_left_multiply_serial(benchmark::State& state) {
    const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const auto x = uniform_vector(g.size());
    std::vector<double> y(g.size());
    for (auto _ : state) {
        kernels::left_multiply_serial(g, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edge_count()));
}

void BM_left_multiply_omp(benchmark::State& state) {
    const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const auto t = kernels::transpose(g);
    const auto x = uniform_vector(g.size());
    std::vector<double> y(g.size());
    for (auto _ : state) {
        kernels::left_multiply_omp(t, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.edge_count()));
}

// Random MFPT slices: the scorer cost does not depend on the values.
struct ScorerFixture {
    std::vector<double> pi, xt, to_hub, from_src;
    std::vector<NodeId> hubs, sources;
    std::vector<std::int64_t> hub_index;
    std::vector<std::size_t> source_hub;
    std::vector<kernels::Candidate> cands;
    kernels::ScoringInputs in;

    ScorerFixture(std::size_t n, std::size_t h, std::size_t n_src) {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> mf(1.0, 1e4);
        pi = uniform_vector(n);
        xt.resize(n);
        for (auto& v : xt) {
            v = unit(rng);
        }
        hub_index.assign(n, -1);
        for (std::size_t q = 0; q < h; ++q) {
            hubs.push_back(static_cast<NodeId>(q));
            hub_index[q] = static_cast<std::int64_t>(q);
        }
        for (std::size_t s = 0; s < n_src; ++s) {
            sources.push_back(static_cast<NodeId>(s));
            source_hub.push_back(s);
        }
        to_hub.resize(n * h);
        from_src.resize(n_src * n);
        for (auto& v : to_hub) {
            v = mf(rng);
        }
        for (auto& v : from_src) {
            v = mf(rng);
        }
        for (std::size_t s = 0; s < n_src; ++s) {
            for (NodeId c = 0; c < n; ++c) {
                if (c != sources[s]) {
                    cands.push_back({s, c, 0.5});
                }
            }
        }
        in.n = n;
        in.pi = pi;
        in.x_tilde = xt;
        in.hubs = hubs;
        in.sources = sources;
        in.to_hub = to_hub;
        in.from_src = from_src;
        in.hub_index = hub_index;
        in.source_hub = source_hub;
    }
};

template <bool Parallel>
void BM_score_candidates(benchmark::State& state) {
    const ScorerFixture f(static_cast<std::size_t>(state.range(0)), 50, 25);
    std::vector<double> scores(f.cands.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::score_candidates_omp(f.in, f.cands, scores);
        } else {
            kernels::score_candidates_serial(f.in, f.cands, scores);
        }
        benchmark::DoNotOptimize(scores.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.cands.size()));
}

template <bool Parallel>
void BM_walk_tallies(benchmark::State& state) {
    const auto g = bench_graph(static_cast<std::size_t>(state.range(0)));
    const auto table = kernels::walk_table(g);
    std::vector<NodeId> hubs;
    for (NodeId q = 0; q < 25; ++q) {
        hubs.push_back(q);
    }
    const std::uint64_t steps = 2'000'000;
    for (auto _ : state) {
        auto t = Parallel ? kernels::walk_tallies_omp(table, g.size(), hubs, 0, steps, 3)
                          : kernels::walk_tallies_serial(table, g.size(), hubs, 0, steps, 3);
        benchmark::DoNotOptimize(t.visits.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(steps));
}

} // namespace

BENCHMARK(BM_left_multiply_serial)->Arg(1'000)->Arg(100'000);
BENCHMARK(BM_left_multiply_omp)->Arg(1'000)->Arg(100'000);
BENCHMARK(BM_score_candidates<false>)->Arg(1'000)->Arg(10'000);
BENCHMARK(BM_score_candidates<true>)->Arg(1'000)->Arg(10'000);
BENCHMARK(BM_walk_tallies<false>)->Arg(1'000)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_walk_tallies<true>)->Arg(1'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
