#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachprob/state.hpp"

namespace reachprob {

/// Thrown when a value-field file is malformed (bad magic, truncated
/// payload, inconsistent header).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One axis of a rectangular Cartesian grid. `count` points are placed at
/// lower + i * spacing with spacing = (upper - lower) / (count - 1), so both
/// endpoints are grid points. A periodic axis wraps with period
/// (upper - lower); the duplicated endpoint is kept (e.g. 201 points over
/// [-pi, pi] include both -pi and pi).
struct AxisSpec {
    double lower = 0.0;
    double upper = 1.0;
    std::int64_t count = 2;
    bool periodic = false;

    bool operator==(const AxisSpec&) const = default;
};

/// Rectangular domain discretized into a Cartesian grid. Row-major storage
/// with the last axis varying fastest.
class GridSpec {
public:
    GridSpec() = default;
    explicit GridSpec(std::vector<AxisSpec> axes);

    int ndims() const { return static_cast<int>(axes_.size()); }
    const AxisSpec& axis(int d) const { return axes_[static_cast<std::size_t>(d)]; }
    const std::vector<AxisSpec>& axes() const { return axes_; }

    double spacing(int d) const { return spacing_[static_cast<std::size_t>(d)]; }
    double inv_spacing(int d) const { return inv_spacing_[static_cast<std::size_t>(d)]; }
    std::size_t stride(int d) const { return strides_[static_cast<std::size_t>(d)]; }
    std::size_t total_points() const { return total_; }

    /// Grid point coordinates for a multi-index; throws std::out_of_range on
    /// any out-of-range component and std::invalid_argument on a size
    /// mismatch.
    State point_of_index(std::span<const std::int64_t> index) const;

    /// Grid point coordinates for a flat row-major index.
    State point_of_flat(std::size_t flat) const;

    /// Decodes a flat index into its per-axis components.
    void flat_to_index(std::size_t flat, std::span<std::int64_t> index) const;

    bool operator==(const GridSpec& o) const { return axes_ == o.axes_; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

private:
    std::vector<AxisSpec> axes_;
    std::vector<double> spacing_;
    std::vector<double> inv_spacing_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

/// Scalar values in [0, 1] at every grid point for one time index.
/// Immutable after construction; safe for concurrent reads.
class ValueField {
public:
    ValueField(GridSpec spec, int time_index, std::vector<double> values);

    const GridSpec& spec() const { return spec_; }
    int time_index() const { return time_index_; }
    std::span<const double> values() const { return values_; }
    double value_at(std::size_t flat) const { return values_[flat]; }

private:
    GridSpec spec_;
    int time_index_;
    std::vector<double> values_;
};

/// Multilinear interpolation of `field` at state `s`.
///
/// Non-periodic axes clamp the coordinate to [lower, upper] first; periodic
/// axes wrap out-of-range coordinates by the period. The result is clamped
/// to the [min, max] of the enclosing cell's corner values, so it is always
/// a convex combination and reproduces stored values exactly at grid points.
inline double interpolate(const ValueField& field, const State& s) {
    const GridSpec& g = field.spec();
    const int n = g.ndims();
    if (s.size() != n)
        throw std::invalid_argument("interpolate: state dimension mismatch");

    double frac[kMaxDims];
    std::size_t base = 0;
    for (int d = 0; d < n; ++d) {
        const AxisSpec& ax = g.axis(d);
        double x = s[d];
        if (ax.periodic) {
            if (x < ax.lower || x > ax.upper) {
                const double period = ax.upper - ax.lower;
                double y = std::fmod(x - ax.lower, period);
                if (y < 0.0) y += period;
                x = ax.lower + y;
            }
        } else {
            if (x < ax.lower) x = ax.lower;
            if (x > ax.upper) x = ax.upper;
        }
        double t = (x - ax.lower) * g.inv_spacing(d);
        // Snap to the node when within rounding distance so stored values
        // are reproduced exactly at grid points.
        const double r = std::nearbyint(t);
        if (std::abs(t - r) <= 1e-9) t = r;
        std::int64_t i0 = static_cast<std::int64_t>(t);
        if (i0 > ax.count - 2) i0 = ax.count - 2;
        if (i0 < 0) i0 = 0;
        double f = t - static_cast<double>(i0);
        if (f < 0.0) f = 0.0;
        if (f > 1.0) f = 1.0;
        frac[d] = f;
        base += static_cast<std::size_t>(i0) * g.stride(d);
    }

    const std::span<const double> v = field.values();
    double acc = 0.0;
    double lo = 1.0, hi = 0.0;
    const unsigned corners = 1u << n;
    for (unsigned c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t off = 0;
        for (int d = 0; d < n; ++d) {
            if (c & (1u << d)) {
                w *= frac[d];
                off += g.stride(d);
            } else {
                w *= 1.0 - frac[d];
            }
        }
        const double val = v[base + off];
        if (val < lo) lo = val;
        if (val > hi) hi = val;
        acc += w * val;
    }
    if (acc < lo) acc = lo;
    if (acc > hi) acc = hi;
    return acc;
}

/// Evaluates f at every grid point and materializes a ValueField at
/// `time_index`. f must be pure and return values in [0, 1]; anything else
/// raises std::domain_error. Evaluation may run on several threads.
ValueField fill(const GridSpec& spec, const std::function<double(const State&)>& f,
                int time_index, int threads = 0);

/// Binary little-endian persistence. Round-trips are bit-exact.
void write_field(const ValueField& field, const std::filesystem::path& path);
ValueField read_field(const std::filesystem::path& path);

} // namespace reachprob
