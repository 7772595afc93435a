#include <random>

#include "doctest.h"
#include "diver/kernels.hpp"
#include "diver/oracle.hpp"
#include "diver/spectral.hpp"
#include "support.hpp"

using namespace diver;

namespace {

bool has_exact_subset_sum(const std::vector<double>& z, std::size_t k, double s) {
    const std::size_t n = z.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) {
            continue;
        }
        long total = 0; // z on a 0.01 grid: compare in hundredths
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                total += std::lround(z[i] * 100);
            }
        }
        if (total == std::lround(s * 100)) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("gadget structure") {
    const auto inst = build_gadget({0.2, 0.3, 0.5}, 2, 0.5);
    REQUIRE(inst.graph);
    const auto& g = *inst.graph;
    CHECK(g.size() == 6);
    CHECK(inst.m == 12);
    CHECK(g.edge_count() == 24); // 12 undirected edges
    for (NodeId u = 0; u < 6; ++u) {
        CHECK(g.out_degree(u) == 4);
        for (const double w : g.weights(u)) {
            CHECK(w == 0.25);
        }
        CHECK_FALSE(g.has_edge(u, u ^ 1u)); // matching removed
    }
    const auto rep = validate(g);
    CHECK(rep.row_stochastic);
    CHECK(rep.strongly_connected);
    CHECK(rep.aperiodic);
    CHECK_FALSE(rep.rationally_selfish);
    CHECK(inst.candidate_edges.size() == 3);
    CHECK(inst.x_tilde == std::vector<double>{0.2, 0.2, 0.3, 0.3, 0.5, 0.5});
    CHECK(inst.x[0] == doctest::Approx((0.5 + 12 * 0.2) / 14.0));
}

TEST_CASE("gadget size-dependent topology") {
    for (std::size_t n = 3; n <= 6; ++n) {
        const auto inst = build_gadget(std::vector<double>(n, 0.5), 1, 0.5);
        CHECK(inst.graph->edge_count() == 2 * inst.m);
        CHECK(inst.m == 2 * n * n - 2 * n);
        CHECK(validate(*inst.graph).aperiodic);
    }
    // n = 2 is a 4-cycle: bipartite, period 2
    const auto c4 = build_gadget({0.5, 0.5}, 1, 0.5);
    CHECK(period(*c4.graph) == 2);
    // n = 1 has no edges at all
    CHECK_FALSE(build_gadget({1.0}, 1, 1.0).graph.has_value());
}

TEST_CASE("gadget input checks") {
    CHECK_THROWS_AS(build_gadget({}, 1, 0.5), Error);
    CHECK_THROWS_AS(build_gadget({1.2}, 1, 0.5), Error);
    CHECK_THROWS_AS(build_gadget({0.2}, 1, -0.1), Error);
    CHECK_THROWS_AS(build_gadget({0.2, 0.3}, 3, 0.5), Error);
    CHECK_THROWS_AS(build_gadget({0.2, 0.3}, 0, 0.5), Error);
    const auto inst = build_gadget({0.2, 0.3, 0.5}, 2, 0.5);
    CHECK_THROWS_AS(verify_gadget(inst, std::vector<std::size_t>{0}), Error);
    CHECK_THROWS_AS(verify_gadget(inst, std::vector<std::size_t>{0, 0}), Error);
}

TEST_CASE("verify_gadget: closed form") {
    const auto one = build_gadget({1.0}, 1, 1.0);
    const auto c1 = verify_gadget(one, std::vector<std::size_t>{0});
    CHECK(c1.lhs == 0.0);
    CHECK(c1.rhs == 0.0);

    const auto single = build_gadget({0.9}, 1, 0.5);
    CHECK(verify_gadget(single, std::vector<std::size_t>{0}).rhs == doctest::Approx(0.4 / 1.0));

    const auto three = build_gadget({0.2, 0.3, 0.5}, 2, 0.5);
    const auto exact = verify_gadget(three, std::vector<std::size_t>{0, 1});
    CHECK(std::abs(exact.lhs) <= 1e-15);
    const auto other = verify_gadget(three, std::vector<std::size_t>{1, 2});
    CHECK(std::abs(other.rhs - 0.3 / 14.0) <= 1e-15);
    CHECK(std::abs(other.lhs - other.rhs) <= 1e-12);
}

TEST_CASE("degree formula agrees with the linear-solve stationary distribution") {
    const auto inst = build_gadget({0.1, 0.7, 0.4, 0.9}, 2, 0.6);
    const std::vector<NodePair> pick{inst.candidate_edges[1], inst.candidate_edges[3]};
    const auto h = add_undirected_uniform(*inst.graph, pick);
    const auto pi = support::stationary(support::dense(h));
    const auto pi0 = support::stationary(support::dense(*inst.graph));
    const double lhs = std::abs(support::dot(pi, inst.x_tilde) - support::dot(pi0, inst.x));
    const auto check = verify_gadget(inst, std::vector<std::size_t>{1, 3});
    CHECK(std::abs(lhs - check.lhs) <= 1e-13);
    CHECK(std::abs(check.lhs - check.rhs) <= 1e-12);
}

TEST_CASE("brute force: trivial cases and caps") {
    std::mt19937_64 rng(2);
    const auto g = support::random_selfish_graph(rng, 6);
    const auto x = support::random_opinions(rng, 6);
    auto xt = x;
    xt[2] = 1.0;
    std::vector<NodePair> cands;
    for (NodeId r = 0; r < 6; ++r) {
        for (NodeId c = 0; c < 6; ++c) {
            if (r != c && !g.has_edge(r, c)) {
                cands.push_back({r, c});
            }
        }
    }
    const auto none = brute_force_diver(g, 0, x, xt, cands);
    const auto pi = eigencentrality(g);
    CHECK(none.edges.empty());
    CHECK(std::abs(none.objective -
                   std::abs(consensus_value(pi, xt) - consensus_value(pi, x))) <= 1e-15);

    const auto same = brute_force_diver(g, 0, x, x, cands);
    CHECK(same.objective == 0.0);

    BruteForceOptions small_cap;
    small_cap.subset_cap = 3;
    CHECK_THROWS_AS(brute_force_diver(g, 2, x, xt, cands, small_cap), Error);
    CHECK_THROWS_AS(brute_force_diver(g, cands.size() + 1, x, xt, cands), Error);
}

TEST_CASE("brute force: serial and parallel agree") {
    std::mt19937_64 rng(9);
    const auto g = support::random_selfish_graph(rng, 7, 0.2);
    const auto x = support::random_opinions(rng, 7);
    auto xt = x;
    xt[0] = 1.0;
    std::vector<NodePair> cands;
    for (NodeId r = 0; r < 7; ++r) {
        for (NodeId c = 0; c < 7; ++c) {
            if (r != c && !g.has_edge(r, c)) {
                cands.push_back({r, c});
            }
        }
    }
    BruteForceOptions bo;
    bo.exec = Exec::serial;
    const auto a = brute_force_diver(g, 2, x, xt, cands, bo);
    bo.exec = Exec::parallel;
    const auto b = brute_force_diver(g, 2, x, xt, cands, bo);
    CHECK(a.edges == b.edges);
    CHECK(a.objective == b.objective);

    // identical opinions everywhere: every subset scores 0 up to roundoff
    const std::vector<double> flat(7, 0.5);
    const auto tie = brute_force_diver(g, 2, flat, flat, cands);
    CHECK(tie.objective <= 1e-12);
    CHECK(tie.edges.size() == 2);
}

TEST_CASE("brute force on the three-value gadget finds the exact subset") {
    const auto inst = build_gadget({0.2, 0.3, 0.5}, 2, 0.5);
    const auto sol = solve_gadget(inst);
    CHECK(sol.chosen == std::vector<std::size_t>{0, 1});
    CHECK(sol.objective <= 1e-12);
    const auto one = solve_gadget(build_gadget({1.0}, 1, 1.0));
    CHECK(one.objective == 0.0);
}

TEST_CASE("gadget objective vanishes iff an exact k-subset sum exists") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> hundredths(0, 100);
    for (int t = 0; t < 40; ++t) {
        const std::size_t n = 3 + t % 8; // up to 10
        std::vector<double> z(n);
        for (auto& v : z) {
            v = hundredths(rng) / 100.0;
        }
        const std::size_t k = 1 + t % 3;
        // half the instances get a planted solution
        double s = hundredths(rng) / 100.0;
        if (t % 2 == 0) {
            double planted = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                planted += z[i];
            }
            if (planted <= 1.0) {
                s = std::round(planted * 100) / 100.0;
            }
        }
        const auto inst = build_gadget(z, k, s);
        const auto sol = solve_gadget(inst);
        CHECK((sol.objective <= 1e-10) == has_exact_subset_sum(z, k, s));
    }
}

TEST_CASE("verify_gadget holds for every subset of small random instances") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + t % 6;
        std::vector<double> z(n);
        for (auto& v : z) {
            v = unit(rng);
        }
        for (std::size_t k = 1; k <= n; ++k) {
            const auto inst = build_gadget(z, k, unit(rng));
            std::vector<std::size_t> subset(k);
            for (std::uint64_t rank = 0; rank < kernels::binomial(n, k); ++rank) {
                kernels::unrank_combination(rank, n, k, subset);
                const auto c = verify_gadget(inst, subset);
                CHECK(std::abs(c.lhs - c.rhs) <= 1e-12);
            }
        }
    }
}

} // TEST_SUITE
