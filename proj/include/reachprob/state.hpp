#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>

namespace reachprob {

/// Maximum state-space dimension supported by the fixed-capacity State type.
inline constexpr int kMaxDims = 8;

/// Fixed-capacity state vector. Value type, no heap allocation, so kernel
/// sampling and interpolation stay allocation-free in the inner loops.
class State {
public:
    State() = default;

    State(std::initializer_list<double> xs) {
        if (static_cast<int>(xs.size()) > kMaxDims)
            throw std::invalid_argument("State: too many components");
        n_ = static_cast<int>(xs.size());
        int i = 0;
        for (double x : xs) v_[i++] = x;
    }

    static State zeros(int n) {
        if (n < 0 || n > kMaxDims)
            throw std::invalid_argument("State: dimension out of range");
        State s;
        s.n_ = n;
        return s;
    }

    int size() const { return n_; }

    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }

    const double* begin() const { return v_.data(); }
    const double* end() const { return v_.data() + n_; }

    bool operator==(const State& o) const {
        if (n_ != o.n_) return false;
        for (int i = 0; i < n_; ++i)
            if (v_[i] != o.v_[i]) return false;
        return true;
    }
    bool operator!=(const State& o) const { return !(*this == o); }

    /// Component-wise sum; sizes must match.
    friend State operator+(const State& a, const State& b) {
        State r = a;
        for (int i = 0; i < r.n_; ++i) r.v_[i] += b.v_[i];
        return r;
    }

private:
    std::array<double, kMaxDims> v_{};
    int n_ = 0;
};

} // namespace reachprob
