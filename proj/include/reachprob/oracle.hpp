#pragma once

#include <memory>
#include <vector>

#include "reachprob/model.hpp"

namespace reachprob {
namespace oracle {

/// Explicit finite-state, finite-noise instance for certifying the solver.
/// States must coincide with the grid points of `grid` so interpolation at
/// them is exact.
struct FiniteChain {
    std::vector<State> states;
    ControlSet controls;
    /// transitions[state][control] -> list of (successor index, probability);
    /// each row sums to 1 within 1e-12.
    std::vector<std::vector<std::vector<std::pair<int, double>>>> transitions;
    TimeVaryingSet target;
    TimeVaryingSet obstacle;
    int horizon = 0;
    GridSpec grid;

    void validate() const;
};

/// Reach-avoid probabilities per (time index, state index) for one chain.
/// table[k][i] is the probability from state i at time k.
using ProbabilityTable = std::vector<std::vector<double>>;

/// Exact reach-avoid probabilities under a fixed policy, by full backward
/// summation over the transition lists. The policy must map into the
/// chain's control set (exact value match), otherwise std::invalid_argument.
///
/// Deliberately shares no code with the grid solver's recursion, so
/// agreement between the two is evidence rather than tautology.
ProbabilityTable exact_reach_avoid(const FiniteChain& chain, const Policy& policy);

/// Exact maximum reach-avoid probabilities plus the argmax control index
/// per (time index, state index); ties broken by the lowest control index.
/// The argmax table has horizon rows (no control is chosen at k = horizon).
std::pair<ProbabilityTable, std::vector<std::vector<int>>>
exact_reach_avoid_max(const FiniteChain& chain);

/// Kernel view of a chain so the grid solver can run on it. sample_one
/// resolves the state by exact match against the chain's states and inverts
/// the transition row's CDF with a single uniform draw.
class ChainKernel : public StochasticKernel {
public:
    explicit ChainKernel(std::shared_ptr<const FiniteChain> chain);

    int dimension() const override;
    State sample_one(const State& s, double u, RngStream& rng) const override;
    bool has_exact_successors() const override { return true; }
    void exact_successors(const State& s, double u,
                          std::vector<Successor>& out) const override;

private:
    int state_index(const State& s) const;
    int control_index(double u) const;

    std::shared_ptr<const FiniteChain> chain_;
};

/// Scenario wrapper for a chain (gamma and sample count supplied by the
/// caller; the grid comes from the chain).
Scenario make_chain_scenario(std::shared_ptr<const FiniteChain> chain, double gamma,
                             int samples);

} // namespace oracle
} // namespace reachprob
