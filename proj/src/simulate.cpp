#include "reachprob/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "reachprob/parallel.hpp"

namespace reachprob {

RolloutRecord rollout(const Scenario& sc, const Policy& policy, const State& s0,
                      RngStream& rng) {
    RolloutRecord rec;
    rec.trajectory.push_back(s0);
    State s = s0;
    for (int k = 0;; ++k) {
        if (sc.obstacle(s, k)) {
            rec.outcome = RolloutRecord::Outcome::kObstacleHit;
            rec.step = k;
            return rec;
        }
        if (sc.target(s, k)) {
            rec.outcome = RolloutRecord::Outcome::kSuccess;
            rec.step = k;
            return rec;
        }
        if (k == sc.horizon) break;
        const double u = policy(s, k);
        s = sc.kernel->sample_one(s, u, rng);
        rec.trajectory.push_back(s);
    }
    rec.outcome = RolloutRecord::Outcome::kHorizonExhausted;
    rec.step = sc.horizon;
    return rec;
}

std::pair<RolloutRecord::Outcome, int> evaluate_trajectory(const Scenario& sc,
                                                           std::span<const State> trajectory) {
    for (int k = 0; k < static_cast<int>(trajectory.size()); ++k) {
        const State& s = trajectory[static_cast<std::size_t>(k)];
        if (sc.obstacle(s, k)) return {RolloutRecord::Outcome::kObstacleHit, k};
        if (sc.target(s, k)) return {RolloutRecord::Outcome::kSuccess, k};
    }
    return {RolloutRecord::Outcome::kHorizonExhausted, sc.horizon};
}

namespace {

int success_count(const Scenario& sc, const Policy& policy, const State& s0, int n,
                  std::uint64_t seed, std::uint64_t point_tag) {
    int successes = 0;
    for (int i = 0; i < n; ++i) {
        RngStream rng(derive_stream(seed, stream_tag::kRollout, point_tag,
                                    static_cast<std::uint64_t>(i), 0));
        if (rollout(sc, policy, s0, rng).success()) ++successes;
    }
    return successes;
}

} // namespace

double empirical_probability(const Scenario& sc, const Policy& policy, const State& s0,
                             int n_rollouts, std::uint64_t seed) {
    if (n_rollouts < 1)
        throw std::invalid_argument("empirical_probability: n_rollouts must be >= 1");
    sc.validate();
    return static_cast<double>(success_count(sc, policy, s0, n_rollouts, seed, 0)) /
           static_cast<double>(n_rollouts);
}

ValidationReport validate(const Scenario& sc, const ValueStore& store, const Policy& policy,
                          const std::vector<State>& points, int n_rollouts, double gamma,
                          std::uint64_t seed, double band, int threads) {
    sc.validate();
    if (n_rollouts < 1) throw std::invalid_argument("validate: n_rollouts must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("validate: gamma must lie in [0, 1]");
    if (!(band >= 0.0)) throw std::invalid_argument("validate: band must be >= 0");

    ValidationReport report;
    report.gamma = gamma;
    report.band = band;
    report.n_rollouts = n_rollouts;
    report.points.resize(points.size());

    const ValueField& v0 = store.field(0);
    parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            ValidationPoint& vp = report.points[i];
            vp.point = points[i];
            vp.predicted = interpolate(v0, vp.point);
            const int successes = success_count(sc, policy, vp.point, n_rollouts, seed,
                                                static_cast<std::uint64_t>(i));
            vp.empirical = static_cast<double>(successes) / static_cast<double>(n_rollouts);
            vp.gap = std::abs(vp.predicted - vp.empirical);
            vp.predicted_member = vp.predicted >= gamma;
            vp.empirical_member = vp.empirical >= gamma;
        }
    });

    double gap_sum = 0.0;
    int agreements = 0;
    int counted = 0;
    for (const auto& vp : report.points) {
        gap_sum += vp.gap;
        if (std::abs(vp.predicted - gamma) < band) {
            ++report.excluded;
            continue;
        }
        ++counted;
        if (vp.predicted_member == vp.empirical_member) ++agreements;
    }
    report.mean_abs_gap = report.points.empty() ? 0.0 : gap_sum / static_cast<double>(report.points.size());
    report.agreement_rate =
        counted == 0 ? 1.0 : static_cast<double>(agreements) / static_cast<double>(counted);
    return report;
}

std::vector<State> subgrid_points(const GridSpec& grid, int fixed_axis, double fixed_value,
                                  int per_axis) {
    const int n = grid.ndims();
    if (fixed_axis < 0 || fixed_axis >= n)
        throw std::invalid_argument("subgrid_points: fixed axis out of range");
    if (per_axis < 1) throw std::invalid_argument("subgrid_points: per_axis must be >= 1");

    std::vector<int> free_axes;
    for (int d = 0; d < n; ++d)
        if (d != fixed_axis) free_axes.push_back(d);

    std::vector<State> points;
    std::vector<int> idx(free_axes.size(), 0);
    const auto coord = [&](int axis, int i) {
        const AxisSpec& ax = grid.axis(axis);
        if (per_axis == 1) return 0.5 * (ax.lower + ax.upper);
        return ax.lower + static_cast<double>(i) * (ax.upper - ax.lower) /
                              static_cast<double>(per_axis - 1);
    };
    while (true) {
        State s = State::zeros(n);
        s[fixed_axis] = fixed_value;
        for (std::size_t d = 0; d < free_axes.size(); ++d)
            s[free_axes[d]] = coord(free_axes[d], idx[d]);
        points.push_back(s);
        // Odometer increment, last free axis fastest.
        int d = static_cast<int>(free_axes.size()) - 1;
        while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == per_axis) {
            idx[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return points;
}

void write_validation_csv(const ValidationReport& report, int ndims,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_validation_csv: cannot open " + path.string());
    if (ndims == 3) {
        out << "x,y,theta,";
    } else {
        for (int d = 0; d < ndims; ++d) out << "x" << d << ",";
    }
    out << "predicted,empirical,gap,predicted_member,empirical_member\n";
    char buf[64];
    for (const auto& vp : report.points) {
        for (int d = 0; d < ndims; ++d) {
            std::snprintf(buf, sizeof buf, "%.17g,", vp.point[d]);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d,%d\n", vp.predicted,
                      vp.empirical, vp.gap, vp.predicted_member ? 1 : 0,
                      vp.empirical_member ? 1 : 0);
        out << buf;
    }
    if (!out)
        throw std::runtime_error("write_validation_csv: write failed for " + path.string());
}

} // namespace reachprob
