#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "reachprob/oracle.hpp"

#include "support/test_chains.hpp"

using namespace reachprob;
using namespace reachprob::oracle;

namespace {

using testsupport::index_set;
using testsupport::integer_chain;
using testsupport::random_chain;
using testsupport::two_state_chain;

/// Independent check: recursive expectation over the trajectory tree with a
/// per-step max, no tables, no memoization.
double tree_max_value(const FiniteChain& chain, int state, int k) {
    const State& s = chain.states[static_cast<std::size_t>(state)];
    if (chain.obstacle(s, k)) return 0.0;
    if (chain.target(s, k)) return 1.0;
    if (k == chain.horizon) return 0.0;
    double best = 0.0;
    for (int c = 0; c < chain.controls.size(); ++c) {
        double acc = 0.0;
        for (const auto& [succ, prob] :
             chain.transitions[static_cast<std::size_t>(state)][static_cast<std::size_t>(c)])
            acc += prob * tree_max_value(chain, succ, k + 1);
        best = std::max(best, acc);
    }
    return best;
}

} // namespace

TEST_CASE("two-state chain: hand-enumerated probability") {
    auto chain = two_state_chain();
    const Policy policy = [](const State&, int) { return 0.0; };
    const auto table = exact_reach_avoid(*chain, policy);
    REQUIRE(table.size() == 3);
    // The four equally weighted trajectories from state 0 succeed in three
    // cases: P = 0.75.
    CHECK(table[0][0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(table[0][1] == 1.0);
    CHECK(table[1][0] == 0.5);
    CHECK(table[2][0] == 0.0); // terminal, not in the target
}

TEST_CASE("degenerate set layouts") {
    FiniteChain chain = integer_chain(3, 1, 4);
    for (int i = 0; i < 3; ++i) chain.transitions[static_cast<std::size_t>(i)][0] = {{i, 1.0}};
    const Policy policy = [](const State&, int) { return 0.0; };

    SUBCASE("all states in the target") {
        chain.target = [](const State&, int) { return true; };
        const auto table = exact_reach_avoid(chain, policy);
        for (const auto& row : table)
            for (double v : row) CHECK(v == 1.0);
    }
    SUBCASE("all states in the obstacle") {
        chain.target = [](const State&, int) { return true; };
        chain.obstacle = [](const State&, int) { return true; };
        const auto table = exact_reach_avoid(chain, policy);
        for (const auto& row : table)
            for (double v : row) CHECK(v == 0.0);
    }
}

TEST_CASE("policy outside the control set is rejected") {
    auto chain = two_state_chain();
    const Policy bad = [](const State&, int) { return 42.0; };
    CHECK_THROWS_AS(exact_reach_avoid(*chain, bad), std::invalid_argument);
}

TEST_CASE("single control: max equals the fixed recursion") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        FiniteChain chain = random_chain(seed, 6, 1, 4);
        const auto fixed = exact_reach_avoid(chain, [](const State&, int) { return 0.0; });
        const auto [maxed, argmax] = exact_reach_avoid_max(chain);
        for (std::size_t k = 0; k < fixed.size(); ++k)
            for (std::size_t i = 0; i < fixed[k].size(); ++i)
                CHECK(maxed[k][i] == fixed[k][i]);
        for (const auto& row : argmax)
            for (int a : row) CHECK(a == 0);
    }
}

TEST_CASE("max avoids the control that leads into the obstacle") {
    FiniteChain chain = integer_chain(3, 2, 2);
    // Control 0 jumps into state 1 (obstacle), control 1 into state 2 (target).
    chain.transitions[0][0] = {{1, 1.0}};
    chain.transitions[0][1] = {{2, 1.0}};
    for (int c = 0; c < 2; ++c) {
        chain.transitions[1][static_cast<std::size_t>(c)] = {{1, 1.0}};
        chain.transitions[2][static_cast<std::size_t>(c)] = {{2, 1.0}};
    }
    chain.obstacle = index_set({1});
    chain.target = index_set({2});
    const auto [table, argmax] = exact_reach_avoid_max(chain);
    CHECK(table[0][0] == 1.0);
    CHECK(argmax[0][0] == 1);
    // Under the constant obstacle-bound policy the value collapses.
    const auto fixed = exact_reach_avoid(chain, [](const State&, int) { return 0.0; });
    CHECK(fixed[0][0] == 0.0);
}

TEST_CASE("5-state 2-control chain matches trajectory-tree enumeration") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        FiniteChain chain = random_chain(seed, 5, 2, 3);
        const auto [table, argmax] = exact_reach_avoid_max(chain);
        (void)argmax;
        for (int i = 0; i < 5; ++i)
            for (int k = 0; k <= 3; ++k)
                CHECK(table[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] ==
                      doctest::Approx(tree_max_value(chain, i, k)).epsilon(1e-13));
    }
}

TEST_CASE("max dominates every in-set policy") {
    for (std::uint64_t seed = 30; seed < 36; ++seed) {
        FiniteChain chain = random_chain(seed, 7, 3, 5);
        const auto [maxed, argmax] = exact_reach_avoid_max(chain);
        (void)argmax;
        for (std::uint64_t pseed = 0; pseed < 4; ++pseed) {
            const Policy policy = [pseed](const State& s, int k) {
                const auto h =
                    mix64(pseed ^ (static_cast<std::uint64_t>(std::llround(s[0])) << 8) ^
                          static_cast<std::uint64_t>(k));
                return static_cast<double>(h % 3);
            };
            const auto fixed = exact_reach_avoid(chain, policy);
            for (std::size_t k = 0; k < fixed.size(); ++k)
                for (std::size_t i = 0; i < fixed[k].size(); ++i)
                    CHECK(maxed[k][i] >= fixed[k][i] - 1e-15);
        }
    }
}

TEST_CASE("chain kernel exposes the transition row") {
    auto chain = std::make_shared<FiniteChain>(*two_state_chain());
    ChainKernel kernel(chain);
    CHECK(kernel.dimension() == 1);
    std::vector<Successor> succ;
    kernel.exact_successors({0.0}, 0.0, succ);
    REQUIRE(succ.size() == 2);
    CHECK(succ[0].prob == 0.5);
    CHECK(succ[1].state[0] == 1.0);

    RngStream rng(64);
    int ones = 0;
    for (int i = 0; i < 2000; ++i) ones += kernel.sample_one({0.0}, 0.0, rng)[0] == 1.0;
    CHECK(ones > 850);
    CHECK(ones < 1150);

    CHECK_THROWS_AS(kernel.sample_one({0.5}, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(kernel.sample_one({0.0}, 3.0, rng), std::invalid_argument);
}

TEST_CASE("transition rows must be stochastic") {
    FiniteChain chain = integer_chain(2, 1, 1);
    chain.transitions[0][0] = {{0, 0.6}, {1, 0.5}};
    chain.transitions[1][0] = {{1, 1.0}};
    CHECK_THROWS_AS(chain.validate(), std::invalid_argument);
    chain.transitions[0][0] = {{0, 0.5}, {5, 0.5}};
    CHECK_THROWS_AS(chain.validate(), std::invalid_argument);
}
