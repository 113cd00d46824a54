#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "reachprob/grid.hpp"
#include "reachprob/rng.hpp"
#include "reachprob/state.hpp"

namespace reachprob {

/// One successor state with its transition probability.
struct Successor {
    State state;
    double prob = 0.0;
};

/// Stochastic transition kernel: the distribution of the next state given
/// the current state and control. Implementations must be immutable and
/// draw randomness only from the stream passed in, so sampling is safe to
/// run concurrently and reproducible for a given stream seed.
class StochasticKernel {
public:
    virtual ~StochasticKernel() = default;

    virtual int dimension() const = 0;

    /// One draw from the kernel.
    virtual State sample_one(const State& s, double u, RngStream& rng) const = 0;

    /// Fills `out` with m draws. Must consume the stream exactly as m calls
    /// of sample_one would; the default does just that. Kernels with an
    /// expensive control-dependent part may override to hoist it out of the
    /// sample loop.
    virtual void sample_batch(const State& s, double u, RngStream& rng,
                              std::span<State> out) const {
        for (auto& t : out) t = sample_one(s, u, rng);
    }

    /// True when the kernel decomposes as deterministic_successor(s, u) plus
    /// a control-independent additive noise. Enables sharing one noise draw
    /// across candidate controls (common random numbers).
    virtual bool has_additive_noise() const { return false; }

    virtual State deterministic_successor(const State&, double) const {
        throw std::logic_error("kernel has no deterministic/noise decomposition");
    }

    /// Fills `out` with additive noise draws; sample_one(s, u, rng) must
    /// equal deterministic_successor(s, u) + draw (same stream consumption).
    virtual void draw_noise(RngStream&, std::span<State>) const {
        throw std::logic_error("kernel has no deterministic/noise decomposition");
    }

    /// True when the kernel has finitely many successors, making exact
    /// expectations possible.
    virtual bool has_exact_successors() const { return false; }

    /// Writes the finite successor distribution of (s, u) into `out`.
    /// Probabilities are positive and sum to 1.
    virtual void exact_successors(const State&, double, std::vector<Successor>&) const {
        throw std::logic_error("kernel has no finite successor support");
    }
};

/// Predicate membership of a time-varying set. Must be pure and
/// deterministic in (s, k).
using TimeVaryingSet = std::function<bool(const State&, int)>;

/// Deterministic control policy: (state, time index) -> control input. The
/// returned control need not belong to any finite control set.
using Policy = std::function<double(const State&, int)>;

/// Ordered finite list of control values.
class ControlSet {
public:
    ControlSet() = default;
    explicit ControlSet(std::vector<double> values);

    /// Uniformly spaced controls over [lower, upper], endpoints included.
    static ControlSet linear(double lower, double upper, int count);

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& values() const { return values_; }

    /// Index of an exactly matching control, or -1.
    int index_of(double u) const;

    /// Index of the nearest control by absolute distance; ties go to the
    /// lower index.
    int nearest_index(double u) const;

private:
    std::vector<double> values_;
};

/// Bundle describing one reach-avoid problem instance.
struct Scenario {
    std::shared_ptr<const StochasticKernel> kernel;
    TimeVaryingSet target;
    TimeVaryingSet obstacle;
    ControlSet controls;
    int horizon = 0;
    double gamma = 0.0;
    int samples = 1;
    GridSpec grid;

    /// Checks the cross-field invariants; throws std::invalid_argument with
    /// the offending field named.
    void validate() const;
};

/// 1 iff s is in the target set at time k.
inline int indicator_target(const TimeVaryingSet& target, const State& s, int k) {
    return target(s, k) ? 1 : 0;
}

/// 0 iff s is in the obstacle at time k, 1 otherwise.
inline int indicator_obstacle_complement(const TimeVaryingSet& obstacle, const State& s, int k) {
    return obstacle(s, k) ? 0 : 1;
}

/// m independent draws from the kernel at (s, u). Deterministic given the
/// stream seed.
std::vector<State> draw_samples(const StochasticKernel& kernel, const State& s, double u,
                                RngStream& rng, int m);

/// Axis-aligned box whose center moves over time; membership uses closed
/// intervals on the first `half_widths.size()` axes and ignores the rest.
TimeVaryingSet moving_box(std::function<State(int)> center_of_k, std::vector<double> half_widths);

} // namespace reachprob
