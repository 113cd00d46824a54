#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "reachprob/model.hpp"

namespace reachprob {
namespace vehicle {

inline constexpr double kPi = std::numbers::pi;

/// Planar vehicle with fixed linear speed and controllable heading rate,
/// flying through a nonlinear wind field. State is (x, y, theta) with theta
/// in (-pi, pi]; control is the heading rate in [-1, 1].
struct VehicleParams {
    double speed = 1.0;   ///< linear velocity
    double dt = 0.1;      ///< control interval; one kernel step integrates this far
    double radius = 0.1;  ///< radius of the uniform position disturbance

    void validate() const {
        if (!(speed > 0.0)) throw std::invalid_argument("vehicle.v: must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("vehicle.dt: must be > 0");
        if (!(radius >= 0.0)) throw std::invalid_argument("vehicle.r: must be >= 0");
    }
};

/// Wind vector at (x, y): w_x = -y - 0.1 y^3, w_y = x + 0.1 x^3.
inline std::pair<double, double> wind(double x, double y) {
    return {-y - 0.1 * y * y * y, x + 0.1 * x * x * x};
}

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

/// Time derivative (xdot, ydot, thetadot) of the vehicle state under
/// control u: velocity along the heading plus wind, heading rate u.
State vector_field(const State& s, double u, double speed = 1.0);

/// One classical 4th-order Runge-Kutta step of the vehicle dynamics with u
/// held constant over [0, dt]. The heading component is updated as
/// wrap_angle(theta + u * dt); with thetadot constant the RK4 combination
/// reduces to exactly that.
State rk4_step(const State& s, double u, double dt, double speed = 1.0);

/// Uniform draw on the closed disk of radius r, via rho = r * sqrt(U1),
/// phi = 2 pi U2 (U1 drawn first).
std::pair<double, double> disk_sample(RngStream& rng, double r);

/// atan2 with the explicit five-case branch definition, range (-pi, pi],
/// and atan2(0, 0) defined as 0.
double safe_atan2(double dy, double dx);

/// Center of the moving target box at step k: (2 cos(k pi/40), 2 sin(k pi/40)).
State target_center(int k);

/// Target and obstacle at step k: axis-aligned squares of half-width 1/2 in
/// (x, y), free in theta. The target circles the origin at radius 2; the
/// obstacle is the diametrically opposite square.
std::pair<TimeVaryingSet, TimeVaryingSet> moving_square_sets();

/// Heading-pursuit control: steer toward the target center, clamped to
/// [-1, 1]. When wrap_error is true (default) the heading error is wrapped
/// to (-pi, pi] before clamping; the literal variant skips the wrap.
double heading_control(const State& s, int k, bool wrap_error = true);

Policy make_heading_policy(bool wrap_error = true);

/// Position disturbance model of the kernel.
enum class DisturbanceModel {
    kDisk,       ///< uniform over the closed disk of radius r
    kEightPoint  ///< eight fixed offsets of magnitude r, probability 1/8 each
};

/// Discrete-time vehicle kernel: rk4_step plus an additive position
/// disturbance; the heading is noise-free. The eight-point model has finite
/// support and therefore allows exact expectations.
class VehicleKernel : public StochasticKernel {
public:
    explicit VehicleKernel(VehicleParams params,
                           DisturbanceModel model = DisturbanceModel::kDisk);

    int dimension() const override { return 3; }
    State sample_one(const State& s, double u, RngStream& rng) const override;
    void sample_batch(const State& s, double u, RngStream& rng,
                      std::span<State> out) const override;

    bool has_additive_noise() const override { return true; }
    State deterministic_successor(const State& s, double u) const override;
    void draw_noise(RngStream& rng, std::span<State> out) const override;

    bool has_exact_successors() const override {
        return model_ == DisturbanceModel::kEightPoint;
    }
    void exact_successors(const State& s, double u,
                          std::vector<Successor>& out) const override;

    const VehicleParams& params() const { return params_; }

private:
    State noise_draw(RngStream& rng) const;

    VehicleParams params_;
    DisturbanceModel model_;
};

} // namespace vehicle
} // namespace reachprob
