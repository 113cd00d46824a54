#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "reachprob/model.hpp"
#include "reachprob/solver.hpp"

namespace reachprob {

/// One forward trajectory with its reach-avoid outcome. Success means the
/// target was entered at some step while the obstacle was avoided up to and
/// including that step; the obstacle check precedes the target check, so a
/// state in both counts as a hit.
struct RolloutRecord {
    enum class Outcome { kSuccess, kObstacleHit, kHorizonExhausted };

    std::vector<State> trajectory;  ///< s_0 .. s_stop
    Outcome outcome = Outcome::kHorizonExhausted;
    /// Step of success or obstacle hit; the horizon for exhausted runs.
    int step = 0;

    bool success() const { return outcome == Outcome::kSuccess; }
};

/// Simulates from s0 under `policy` until success, obstacle hit, or the
/// horizon. No dynamics are evaluated once the outcome is decided, and no
/// control is applied at the final step.
RolloutRecord rollout(const Scenario& scenario, const Policy& policy, const State& s0,
                      RngStream& rng);

/// Re-derives the outcome of a stored trajectory from the scenario's sets
/// alone. rollout composed with this is the identity on outcomes.
std::pair<RolloutRecord::Outcome, int> evaluate_trajectory(const Scenario& scenario,
                                                           std::span<const State> trajectory);

/// Fraction of successes over n independent rollouts. Deterministic given
/// the seed; rollout i draws from its own derived stream.
double empirical_probability(const Scenario& scenario, const Policy& policy, const State& s0,
                             int n_rollouts, std::uint64_t seed);

struct ValidationPoint {
    State point;
    double predicted = 0.0;  ///< interpolated V_0
    double empirical = 0.0;  ///< rollout success frequency
    double gap = 0.0;        ///< |predicted - empirical|
    bool predicted_member = false;
    bool empirical_member = false;
};

/// Comparison of the solved V_0 against rollout frequencies on a set of
/// initial states.
struct ValidationReport {
    std::vector<ValidationPoint> points;
    double gamma = 0.0;
    double band = 0.0;  ///< points with |predicted - gamma| < band are
                        ///< excluded from the agreement rate
    int n_rollouts = 0;
    double mean_abs_gap = 0.0;
    double agreement_rate = 1.0;  ///< 1.0 when every point is excluded
    int excluded = 0;
};

/// Runs n_rollouts rollouts from every test point and compares the
/// empirical success frequency against interpolated V_0, classifying both
/// sides against gamma. Points run concurrently; each rollout owns a stream
/// derived from (seed, point index, rollout index).
ValidationReport validate(const Scenario& scenario, const ValueStore& store,
                          const Policy& policy, const std::vector<State>& points,
                          int n_rollouts, double gamma, std::uint64_t seed,
                          double band = 0.05, int threads = 0);

/// Evenly spaced test points: `per_axis` points per free axis (endpoints
/// included), with `fixed_axis` pinned at `fixed_value`.
std::vector<State> subgrid_points(const GridSpec& grid, int fixed_axis, double fixed_value,
                                  int per_axis);

/// CSV report: x,y,theta,predicted,empirical,gap,predicted_member,empirical_member.
void write_validation_csv(const ValidationReport& report, int ndims,
                          const std::filesystem::path& path);

} // namespace reachprob
