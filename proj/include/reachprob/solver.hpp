#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "reachprob/grid.hpp"
#include "reachprob/model.hpp"

namespace reachprob {

/// How one-step expectations E[V_k(F(.|s,u))] are evaluated.
struct ExpectationEstimator {
    enum class Mode { kMonteCarlo, kExact };

    Mode mode = Mode::kMonteCarlo;
    int samples = 1;           ///< Monte Carlo sample count m
    std::uint64_t seed = 0;    ///< base seed all sampling streams derive from
    /// Reuse one disturbance stream across all controls at a grid point.
    /// Reduces comparison noise in the argmax; has no effect on fixed-policy
    /// sweeps or exact mode.
    bool common_random_numbers = true;

    static ExpectationEstimator monte_carlo(int m, std::uint64_t seed, bool crn = true) {
        return {Mode::kMonteCarlo, m, seed, crn};
    }
    static ExpectationEstimator exact() { return {Mode::kExact, 1, 0, false}; }
};

enum class SolveMode { kFixedPolicy, kOptimal };

/// The family of value fields V_k for k = 0..T produced by one solve, all on
/// one grid. Backs level-set queries and optimal-policy evaluation.
class ValueStore {
public:
    ValueStore(SolveMode mode, double gamma, std::string fingerprint,
               std::vector<ValueField> fields_by_k);

    int horizon() const { return static_cast<int>(fields_.size()) - 1; }
    const ValueField& field(int k) const;
    SolveMode mode() const { return mode_; }
    double gamma() const { return gamma_; }
    const std::string& fingerprint() const { return fingerprint_; }

private:
    SolveMode mode_;
    double gamma_;
    std::string fingerprint_;
    std::vector<ValueField> fields_;
};

/// Stream seed for the Monte Carlo draw used when producing the value at
/// time index `k_out` and flat grid point `point`. `slot` is the control
/// index, or kCommonNoiseSlot when one stream is shared across controls.
/// Sampling depends only on these coordinates, never on thread schedule.
inline std::uint64_t solve_stream_seed(std::uint64_t seed, int k_out, std::size_t point,
                                       std::uint64_t slot) {
    return derive_stream(seed, stream_tag::kSolve, static_cast<std::uint64_t>(k_out),
                         static_cast<std::uint64_t>(point), slot);
}

/// Control slot used by the optimal backstep for control index c.
inline std::uint64_t control_slot(const ExpectationEstimator& est, int c) {
    return est.common_random_numbers ? kCommonNoiseSlot : static_cast<std::uint64_t>(c);
}

/// Terminal condition V_T = min(target indicator, obstacle complement) on
/// the grid.
ValueField terminal_field(const Scenario& scenario, int threads = 0);

/// One-step expectation of `next` under the kernel at (s, u). Monte Carlo
/// mode averages interpolations over m draws from the stream seeded with
/// `stream_seed`; exact mode sums over the kernel's finite successors
/// (std::logic_error when the kernel has none). Result is clamped to [0, 1].
double expectation(const ValueField& next, const StochasticKernel& kernel, const State& s,
                   double u, const ExpectationEstimator& est, std::uint64_t stream_seed);

/// One backward step under a fixed policy: produces the field at
/// time_index k-1 from the field at k. Points inside the obstacle get 0 and
/// points inside the target get 1 without sampling; the case split equals
/// min{O, max{I, E[V_k]}}.
ValueField backstep_fixed(const Scenario& scenario, const Policy& policy,
                          const ValueField& v_next, const ExpectationEstimator& est,
                          int threads = 0);

/// One backward step maximizing the expectation over the scenario's control
/// set; argmax ties break toward the lowest control index.
ValueField backstep_optimal(const Scenario& scenario, const ValueField& v_next,
                            const ExpectationEstimator& est, int threads = 0);

struct SolveOptions {
    int threads = 0;
    std::string fingerprint;  ///< recorded in the store and its manifest
    /// Called after each produced field with (k, wall seconds, min, max).
    std::function<void(int, double, double, double)> progress;
};

/// Full backward recursion under a fixed policy: terminal field, then T
/// applications of backstep_fixed.
ValueStore solve_fixed(const Scenario& scenario, const Policy& policy,
                       const ExpectationEstimator& est, const SolveOptions& options = {});

/// Full backward recursion with per-step control maximization.
ValueStore solve_optimal(const Scenario& scenario, const ExpectationEstimator& est,
                         const SolveOptions& options = {});

/// Greedy policy extracted from a solved optimal store:
/// argmax_u E[V_{k+1}(F(.|s,u))], lowest-index tie-break. At k = horizon
/// there is no successor field and the first control is returned (rollouts
/// never apply a control at the final step). Evaluation is a pure function
/// of (s, k): its sampling stream derives from the state's bit pattern.
Policy optimal_policy(std::shared_ptr<const ValueStore> store, const Scenario& scenario,
                      const ExpectationEstimator& est);

/// Persists one value-field file per k plus manifest.json into `dir`
/// (created if absent).
void save_store(const ValueStore& store, const std::filesystem::path& dir);

/// Loads a store previously written by save_store; FormatError on a
/// malformed manifest or field file.
ValueStore load_store(const std::filesystem::path& dir);

} // namespace reachprob
