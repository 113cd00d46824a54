#pragma once

// Shared helpers for building small finite chains in tests.

#include <cmath>
#include <memory>
#include <set>

#include "reachprob/oracle.hpp"

namespace reachprob::testsupport {

/// 1D chain whose states are the integers 0..n-1 on a matching grid, with
/// empty transition rows to be filled by the caller.
inline oracle::FiniteChain integer_chain(int n_states, int n_controls, int horizon) {
    oracle::FiniteChain chain;
    for (int i = 0; i < n_states; ++i) chain.states.push_back({static_cast<double>(i)});
    std::vector<double> controls;
    for (int c = 0; c < n_controls; ++c) controls.push_back(static_cast<double>(c));
    chain.controls = ControlSet(std::move(controls));
    chain.horizon = horizon;
    chain.grid = GridSpec({{0.0, static_cast<double>(n_states - 1),
                            static_cast<std::int64_t>(n_states), false}});
    chain.target = [](const State&, int) { return false; };
    chain.obstacle = [](const State&, int) { return false; };
    chain.transitions.assign(
        static_cast<std::size_t>(n_states),
        std::vector<std::vector<std::pair<int, double>>>(static_cast<std::size_t>(n_controls)));
    return chain;
}

/// Membership by rounded first coordinate, time-invariant.
inline TimeVaryingSet index_set(std::set<int> indices) {
    return [indices = std::move(indices)](const State& s, int) {
        return indices.contains(static_cast<int>(std::llround(s[0])));
    };
}

/// Randomized chain: 2-3 successors per (state, control) with normalized
/// weights, one target state, and one obstacle state when it does not
/// collide with the target.
inline oracle::FiniteChain random_chain(std::uint64_t seed, int n_states, int n_controls,
                                        int horizon) {
    RngStream rng(seed);
    oracle::FiniteChain chain = integer_chain(n_states, n_controls, horizon);
    for (int i = 0; i < n_states; ++i) {
        for (int c = 0; c < n_controls; ++c) {
            const int n_succ = 2 + static_cast<int>(rng.next_below(2));
            std::vector<std::pair<int, double>> row;
            double total = 0.0;
            for (int j = 0; j < n_succ; ++j) {
                const int succ =
                    static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_states)));
                const double w = rng.next_double() + 0.05;
                row.emplace_back(succ, w);
                total += w;
            }
            double running = 0.0;
            for (std::size_t j = 0; j + 1 < row.size(); ++j) {
                row[j].second /= total;
                running += row[j].second;
            }
            row.back().second = 1.0 - running;
            chain.transitions[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = row;
        }
    }
    std::set<int> target, obstacle;
    target.insert(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_states))));
    const int maybe_obstacle =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n_states)));
    if (!target.contains(maybe_obstacle)) obstacle.insert(maybe_obstacle);
    chain.target = index_set(std::move(target));
    chain.obstacle = index_set(std::move(obstacle));
    return chain;
}

/// The spec's two-state example: from 0 stay/advance with probability 1/2,
/// state 1 absorbing and always in the target, T = 2, P(0, 0) = 0.75.
inline std::shared_ptr<oracle::FiniteChain> two_state_chain() {
    auto chain = std::make_shared<oracle::FiniteChain>(integer_chain(2, 1, 2));
    chain->transitions[0][0] = {{0, 0.5}, {1, 0.5}};
    chain->transitions[1][0] = {{1, 1.0}};
    chain->target = index_set({1});
    return chain;
}

} // namespace reachprob::testsupport
