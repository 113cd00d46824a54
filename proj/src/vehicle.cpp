#include "reachprob/vehicle.hpp"

#include <array>

namespace reachprob {
namespace vehicle {

namespace {

void derivative(double x, double y, double theta, double u, double speed,
                std::array<double, 3>& d) {
    const auto [wx, wy] = wind(x, y);
    d[0] = speed * std::cos(theta) + wx;
    d[1] = speed * std::sin(theta) + wy;
    d[2] = u;
}

} // namespace

State vector_field(const State& s, double u, double speed) {
    if (s.size() != 3) throw std::invalid_argument("vector_field: state must be 3D");
    std::array<double, 3> d;
    derivative(s[0], s[1], s[2], u, speed, d);
    return {d[0], d[1], d[2]};
}

State rk4_step(const State& s, double u, double dt, double speed) {
    if (s.size() != 3) throw std::invalid_argument("rk4_step: state must be 3D");
    std::array<double, 3> k1, k2, k3, k4;
    derivative(s[0], s[1], s[2], u, speed, k1);
    derivative(s[0] + 0.5 * dt * k1[0], s[1] + 0.5 * dt * k1[1], s[2] + 0.5 * dt * k1[2], u,
               speed, k2);
    derivative(s[0] + 0.5 * dt * k2[0], s[1] + 0.5 * dt * k2[1], s[2] + 0.5 * dt * k2[2], u,
               speed, k3);
    derivative(s[0] + dt * k3[0], s[1] + dt * k3[1], s[2] + dt * k3[2], u, speed, k4);
    State next = State::zeros(3);
    next[0] = s[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    next[1] = s[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    // thetadot = u is constant, so the RK4 combination telescopes to
    // theta + u * dt; computing it directly keeps the update exact.
    next[2] = wrap_angle(s[2] + u * dt);
    return next;
}

std::pair<double, double> disk_sample(RngStream& rng, double r) {
    if (!(r >= 0.0)) throw std::invalid_argument("disk_sample: r must be >= 0");
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const double rho = r * std::sqrt(u1);
    const double phi = 2.0 * kPi * u2;
    return {rho * std::cos(phi), rho * std::sin(phi)};
}

double safe_atan2(double dy, double dx) {
    if (dx > 0.0) return std::atan(dy / dx);
    if (dx < 0.0 && dy >= 0.0) return std::atan(dy / dx) + kPi;
    if (dx < 0.0 && dy < 0.0) return std::atan(dy / dx) - kPi;
    if (dx == 0.0 && dy > 0.0) return kPi / 2.0;
    if (dx == 0.0 && dy < 0.0) return -kPi / 2.0;
    return 0.0;
}

State target_center(int k) {
    const double phase = static_cast<double>(k) * kPi / 40.0;
    State c = State::zeros(2);
    c[0] = 2.0 * std::cos(phase);
    c[1] = 2.0 * std::sin(phase);
    return c;
}

std::pair<TimeVaryingSet, TimeVaryingSet> moving_square_sets() {
    TimeVaryingSet target = moving_box([](int k) { return target_center(k); }, {0.5, 0.5});
    TimeVaryingSet obstacle = moving_box(
        [](int k) {
            const double phase = static_cast<double>(k) * kPi / 40.0 + kPi;
            State c = State::zeros(2);
            c[0] = 2.0 * std::cos(phase);
            c[1] = 2.0 * std::sin(phase);
            return c;
        },
        {0.5, 0.5});
    return {std::move(target), std::move(obstacle)};
}

double heading_control(const State& s, int k, bool wrap_error) {
    const State c = target_center(k);
    double err = safe_atan2(c[1] - s[1], c[0] - s[0]) - s[2];
    if (wrap_error) err = wrap_angle(err);
    if (err < -1.0) err = -1.0;
    if (err > 1.0) err = 1.0;
    return err;
}

Policy make_heading_policy(bool wrap_error) {
    return [wrap_error](const State& s, int k) { return heading_control(s, k, wrap_error); };
}

VehicleKernel::VehicleKernel(VehicleParams params, DisturbanceModel model)
    : params_(params), model_(model) {
    params_.validate();
}

State VehicleKernel::noise_draw(RngStream& rng) const {
    State n = State::zeros(3);
    if (model_ == DisturbanceModel::kDisk) {
        const auto [dx, dy] = disk_sample(rng, params_.radius);
        n[0] = dx;
        n[1] = dy;
    } else {
        const auto j = rng.next_below(8);
        const double phi = static_cast<double>(j) * (kPi / 4.0);
        n[0] = params_.radius * std::cos(phi);
        n[1] = params_.radius * std::sin(phi);
    }
    return n;
}

State VehicleKernel::sample_one(const State& s, double u, RngStream& rng) const {
    return deterministic_successor(s, u) + noise_draw(rng);
}

void VehicleKernel::sample_batch(const State& s, double u, RngStream& rng,
                                 std::span<State> out) const {
    const State det = deterministic_successor(s, u);
    for (auto& t : out) t = det + noise_draw(rng);
}

State VehicleKernel::deterministic_successor(const State& s, double u) const {
    return rk4_step(s, u, params_.dt, params_.speed);
}

void VehicleKernel::draw_noise(RngStream& rng, std::span<State> out) const {
    for (auto& t : out) t = noise_draw(rng);
}

void VehicleKernel::exact_successors(const State& s, double u,
                                     std::vector<Successor>& out) const {
    if (model_ != DisturbanceModel::kEightPoint)
        throw std::logic_error("vehicle kernel: disk disturbance has no finite support");
    const State det = deterministic_successor(s, u);
    out.clear();
    out.reserve(8);
    for (int j = 0; j < 8; ++j) {
        const double phi = static_cast<double>(j) * (kPi / 4.0);
        State n = State::zeros(3);
        n[0] = params_.radius * std::cos(phi);
        n[1] = params_.radius * std::sin(phi);
        out.push_back({det + n, 1.0 / 8.0});
    }
}

} // namespace vehicle
} // namespace reachprob
