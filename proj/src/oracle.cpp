#include "reachprob/oracle.hpp"

#include <cmath>
#include <string>

namespace reachprob {
namespace oracle {

void FiniteChain::validate() const {
    const int n = static_cast<int>(states.size());
    if (n == 0) throw std::invalid_argument("chain.states: must be non-empty");
    if (controls.size() < 1) throw std::invalid_argument("chain.controls: must be non-empty");
    if (horizon < 0) throw std::invalid_argument("chain.horizon: must be >= 0");
    if (!target) throw std::invalid_argument("chain.target: missing");
    if (!obstacle) throw std::invalid_argument("chain.obstacle: missing");
    if (static_cast<int>(transitions.size()) != n)
        throw std::invalid_argument("chain.transitions: need one row per state");
    for (int i = 0; i < n; ++i) {
        const auto& per_control = transitions[static_cast<std::size_t>(i)];
        if (static_cast<int>(per_control.size()) != controls.size())
            throw std::invalid_argument("chain.transitions: state " + std::to_string(i) +
                                        " needs one list per control");
        for (const auto& row : per_control) {
            if (row.empty())
                throw std::invalid_argument("chain.transitions: empty successor list");
            double sum = 0.0;
            for (const auto& [succ, prob] : row) {
                if (succ < 0 || succ >= n)
                    throw std::invalid_argument("chain.transitions: successor index " +
                                                std::to_string(succ) + " out of range");
                if (!(prob >= 0.0))
                    throw std::invalid_argument("chain.transitions: negative probability");
                sum += prob;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("chain.transitions: row sums to " +
                                            std::to_string(sum) + ", expected 1");
        }
    }
    // States must sit on grid points so the solver's interpolation at them
    // is exact.
    for (const auto& s : states) {
        if (s.size() != grid.ndims())
            throw std::invalid_argument("chain.states: dimension mismatch with grid");
    }
}

namespace {

std::vector<double> terminal_row(const FiniteChain& chain) {
    const int n = static_cast<int>(chain.states.size());
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const State& s = chain.states[static_cast<std::size_t>(i)];
        const bool in_target = chain.target(s, chain.horizon);
        const bool in_obstacle = chain.obstacle(s, chain.horizon);
        row[static_cast<std::size_t>(i)] = (in_target && !in_obstacle) ? 1.0 : 0.0;
    }
    return row;
}

} // namespace

ProbabilityTable exact_reach_avoid(const FiniteChain& chain, const Policy& policy) {
    chain.validate();
    const int n = static_cast<int>(chain.states.size());
    const int T = chain.horizon;
    ProbabilityTable table(static_cast<std::size_t>(T) + 1);
    table[static_cast<std::size_t>(T)] = terminal_row(chain);
    for (int k = T - 1; k >= 0; --k) {
        std::vector<double> row(static_cast<std::size_t>(n));
        const auto& next = table[static_cast<std::size_t>(k) + 1];
        for (int i = 0; i < n; ++i) {
            const State& s = chain.states[static_cast<std::size_t>(i)];
            if (chain.obstacle(s, k)) {
                row[static_cast<std::size_t>(i)] = 0.0;
                continue;
            }
            if (chain.target(s, k)) {
                row[static_cast<std::size_t>(i)] = 1.0;
                continue;
            }
            const double u = policy(s, k);
            const int c = chain.controls.index_of(u);
            if (c < 0)
                throw std::invalid_argument("exact_reach_avoid: policy control " +
                                            std::to_string(u) + " not in the chain's set");
            double acc = 0.0;
            for (const auto& [succ, prob] :
                 chain.transitions[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)])
                acc += prob * next[static_cast<std::size_t>(succ)];
            row[static_cast<std::size_t>(i)] = acc;
        }
        table[static_cast<std::size_t>(k)] = std::move(row);
    }
    return table;
}

std::pair<ProbabilityTable, std::vector<std::vector<int>>>
exact_reach_avoid_max(const FiniteChain& chain) {
    chain.validate();
    const int n = static_cast<int>(chain.states.size());
    const int T = chain.horizon;
    ProbabilityTable table(static_cast<std::size_t>(T) + 1);
    std::vector<std::vector<int>> argmax(static_cast<std::size_t>(T));
    table[static_cast<std::size_t>(T)] = terminal_row(chain);
    for (int k = T - 1; k >= 0; --k) {
        std::vector<double> row(static_cast<std::size_t>(n));
        std::vector<int> arg(static_cast<std::size_t>(n), 0);
        const auto& next = table[static_cast<std::size_t>(k) + 1];
        for (int i = 0; i < n; ++i) {
            const State& s = chain.states[static_cast<std::size_t>(i)];
            if (chain.obstacle(s, k)) {
                row[static_cast<std::size_t>(i)] = 0.0;
                continue;
            }
            if (chain.target(s, k)) {
                row[static_cast<std::size_t>(i)] = 1.0;
                continue;
            }
            double best = 0.0;
            int best_c = 0;
            for (int c = 0; c < chain.controls.size(); ++c) {
                double acc = 0.0;
                for (const auto& [succ, prob] :
                     chain.transitions[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)])
                    acc += prob * next[static_cast<std::size_t>(succ)];
                if (acc > best) {
                    best = acc;
                    best_c = c;
                }
            }
            row[static_cast<std::size_t>(i)] = best;
            arg[static_cast<std::size_t>(i)] = best_c;
        }
        table[static_cast<std::size_t>(k)] = std::move(row);
        argmax[static_cast<std::size_t>(k)] = std::move(arg);
    }
    return {std::move(table), std::move(argmax)};
}

ChainKernel::ChainKernel(std::shared_ptr<const FiniteChain> chain) : chain_(std::move(chain)) {
    chain_->validate();
}

int ChainKernel::dimension() const { return chain_->grid.ndims(); }

int ChainKernel::state_index(const State& s) const {
    for (std::size_t i = 0; i < chain_->states.size(); ++i)
        if (chain_->states[i] == s) return static_cast<int>(i);
    throw std::invalid_argument("chain kernel: state is not one of the chain's states");
}

int ChainKernel::control_index(double u) const {
    const int c = chain_->controls.index_of(u);
    if (c < 0)
        throw std::invalid_argument("chain kernel: control " + std::to_string(u) +
                                    " not in the chain's set");
    return c;
}

State ChainKernel::sample_one(const State& s, double u, RngStream& rng) const {
    const auto& row = chain_->transitions[static_cast<std::size_t>(state_index(s))]
                                         [static_cast<std::size_t>(control_index(u))];
    const double x = rng.next_double();
    double cdf = 0.0;
    for (const auto& [succ, prob] : row) {
        cdf += prob;
        if (x < cdf) return chain_->states[static_cast<std::size_t>(succ)];
    }
    return chain_->states[static_cast<std::size_t>(row.back().first)];
}

void ChainKernel::exact_successors(const State& s, double u,
                                   std::vector<Successor>& out) const {
    const auto& row = chain_->transitions[static_cast<std::size_t>(state_index(s))]
                                         [static_cast<std::size_t>(control_index(u))];
    out.clear();
    out.reserve(row.size());
    for (const auto& [succ, prob] : row) {
        if (prob > 0.0)
            out.push_back({chain_->states[static_cast<std::size_t>(succ)], prob});
    }
}

Scenario make_chain_scenario(std::shared_ptr<const FiniteChain> chain, double gamma,
                             int samples) {
    chain->validate();
    Scenario sc;
    sc.target = chain->target;
    sc.obstacle = chain->obstacle;
    sc.controls = chain->controls;
    sc.horizon = chain->horizon;
    sc.gamma = gamma;
    sc.samples = samples;
    sc.grid = chain->grid;
    sc.kernel = std::make_shared<ChainKernel>(std::move(chain));
    sc.validate();
    return sc;
}

} // namespace oracle
} // namespace reachprob
