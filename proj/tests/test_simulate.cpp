#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "reachprob/oracle.hpp"
#include "reachprob/simulate.hpp"
#include "reachprob/vehicle.hpp"

#include "support/test_chains.hpp"

using namespace reachprob;
using testsupport::index_set;
using testsupport::two_state_chain;

namespace {

/// Kernel that must never be sampled: outcomes decided at k=0 should not
/// evaluate any dynamics.
class PoisonKernel : public StochasticKernel {
public:
    int dimension() const override { return 2; }
    State sample_one(const State&, double, RngStream&) const override {
        throw std::logic_error("PoisonKernel sampled");
    }
};

Scenario poison_scenario(TimeVaryingSet target, TimeVaryingSet obstacle) {
    Scenario sc;
    sc.kernel = std::make_shared<PoisonKernel>();
    sc.target = std::move(target);
    sc.obstacle = std::move(obstacle);
    sc.controls = ControlSet({0.0});
    sc.horizon = 5;
    sc.gamma = 0.5;
    sc.samples = 1;
    sc.grid = GridSpec({{-1.0, 1.0, 3, false}, {-1.0, 1.0, 3, false}});
    return sc;
}

const Policy kZeroPolicy = [](const State&, int) { return 0.0; };

} // namespace

TEST_CASE("rollout outcomes at step zero") {
    const TimeVaryingSet inside = [](const State&, int) { return true; };
    const TimeVaryingSet outside = [](const State&, int) { return false; };

    SUBCASE("start in the target outside the obstacle: immediate success") {
        Scenario sc = poison_scenario(inside, outside);
        RngStream rng(1);
        const RolloutRecord rec = rollout(sc, kZeroPolicy, {0.0, 0.0}, rng);
        CHECK(rec.outcome == RolloutRecord::Outcome::kSuccess);
        CHECK(rec.step == 0);
        CHECK(rec.trajectory.size() == 1);
    }
    SUBCASE("start in target and obstacle: the obstacle dominates") {
        Scenario sc = poison_scenario(inside, inside);
        RngStream rng(1);
        const RolloutRecord rec = rollout(sc, kZeroPolicy, {0.0, 0.0}, rng);
        CHECK(rec.outcome == RolloutRecord::Outcome::kObstacleHit);
        CHECK(rec.step == 0);
    }
}

TEST_CASE("horizon exhaustion records the full trajectory") {
    // Vehicle dynamics, sets never hit.
    Scenario sc;
    sc.kernel = std::make_shared<vehicle::VehicleKernel>(vehicle::VehicleParams{});
    sc.target = [](const State&, int) { return false; };
    sc.obstacle = [](const State&, int) { return false; };
    sc.controls = ControlSet({0.0});
    sc.horizon = 5;
    sc.gamma = 0.5;
    sc.samples = 1;
    sc.grid = GridSpec({{-4.0, 4.0, 3, false},
                        {-4.0, 4.0, 3, false},
                        {-vehicle::kPi, vehicle::kPi, 3, true}});
    RngStream rng(3);
    const RolloutRecord rec = rollout(sc, kZeroPolicy, {0.0, 0.0, 0.0}, rng);
    CHECK(rec.outcome == RolloutRecord::Outcome::kHorizonExhausted);
    CHECK(rec.step == 5);
    CHECK(rec.trajectory.size() == 6);
}

TEST_CASE("outcome re-evaluation reproduces the rollout") {
    auto chain = two_state_chain();
    Scenario sc = oracle::make_chain_scenario(chain, 0.5, 1);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed);
        const RolloutRecord rec = rollout(sc, kZeroPolicy, {0.0}, rng);
        const auto [outcome, step] = evaluate_trajectory(sc, rec.trajectory);
        CHECK(outcome == rec.outcome);
        CHECK(step == rec.step);
    }
}

TEST_CASE("empirical probability on trivial and chain scenarios") {
    auto chain = two_state_chain();
    Scenario sc = oracle::make_chain_scenario(chain, 0.5, 1);

    // Start in the target: every rollout succeeds at step 0.
    CHECK(empirical_probability(sc, kZeroPolicy, {1.0}, 500, 9) == 1.0);

    // Start in an always-obstacle variant: no successes.
    auto blocked = std::make_shared<oracle::FiniteChain>(*chain);
    blocked->obstacle = [](const State&, int) { return true; };
    Scenario sc_blocked = oracle::make_chain_scenario(blocked, 0.5, 1);
    CHECK(empirical_probability(sc_blocked, kZeroPolicy, {0.0}, 200, 9) == 0.0);

    // Exact value 0.75; binomial 3 sigma at n=1000 is about 0.041.
    const double p = empirical_probability(sc, kZeroPolicy, {0.0}, 1000, 12345);
    CHECK(std::abs(p - 0.75) <= 0.05);

    // Deterministic in the seed.
    CHECK(empirical_probability(sc, kZeroPolicy, {0.0}, 1000, 12345) == p);
}

TEST_CASE("validation report compares prediction and frequency") {
    auto chain = two_state_chain();
    Scenario sc = oracle::make_chain_scenario(chain, 0.5, 1);
    const auto est = ExpectationEstimator::exact();
    ValueStore store = solve_fixed(sc, kZeroPolicy, est);

    const std::vector<State> points = {{0.0}, {1.0}};
    const ValidationReport report = validate(sc, store, kZeroPolicy, points, 2000, 0.6, 77);
    REQUIRE(report.points.size() == 2);
    CHECK(report.points[0].predicted == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::abs(report.points[0].empirical - 0.75) <= 0.04);
    CHECK(report.points[0].predicted_member);
    CHECK(report.points[1].predicted == 1.0);
    CHECK(report.points[1].empirical == 1.0);
    CHECK(report.points[1].gap == 0.0);
    CHECK(report.mean_abs_gap <= 0.03);
    CHECK(report.agreement_rate == 1.0);
    CHECK(report.excluded == 0);

    // A band wide enough to exclude everything yields the vacuous rate.
    const ValidationReport banded =
        validate(sc, store, kZeroPolicy, points, 100, 0.75, 77, 0.5);
    CHECK(banded.excluded == 2);
    CHECK(banded.agreement_rate == 1.0);

    // Same seed, same report.
    const ValidationReport again = validate(sc, store, kZeroPolicy, points, 2000, 0.6, 77);
    CHECK(again.points[0].empirical == report.points[0].empirical);
}

TEST_CASE("subgrid points cover the slice") {
    GridSpec g({{-4.0, 4.0, 11, false},
                {-2.0, 2.0, 11, false},
                {-vehicle::kPi, vehicle::kPi, 11, true}});
    const auto points = subgrid_points(g, 2, 0.0, 4);
    REQUIRE(points.size() == 16);
    for (const auto& s : points) CHECK(s[2] == 0.0);
    CHECK(points.front()[0] == -4.0);
    CHECK(points.front()[1] == -2.0);
    CHECK(points.back()[0] == 4.0);
    CHECK(points.back()[1] == 2.0);
    // Last free axis varies fastest.
    CHECK(points[1][0] == -4.0);
    CHECK(points[1][1] != -2.0);

    CHECK_THROWS_AS(subgrid_points(g, 3, 0.0, 4), std::invalid_argument);
}

TEST_CASE("validation CSV format") {
    ValidationReport report;
    report.n_rollouts = 10;
    ValidationPoint vp;
    vp.point = {1.0, 2.0, 3.0};
    vp.predicted = 0.5;
    vp.empirical = 0.25;
    vp.gap = 0.25;
    vp.predicted_member = true;
    vp.empirical_member = false;
    report.points.push_back(vp);

    const auto path = std::filesystem::temp_directory_path() / "validation_test.csv";
    write_validation_csv(report, 3, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "x,y,theta,predicted,empirical,gap,predicted_member,empirical_member");
    CHECK(row == "1,2,3,0.5,0.25,0.25,1,0");
    std::filesystem::remove(path);
}
