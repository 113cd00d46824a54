#include "reachprob/model.hpp"

#include <cmath>
#include <string>

namespace reachprob {

ControlSet::ControlSet(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty())
        throw std::invalid_argument("controls: control set must be non-empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw std::invalid_argument("controls: control values must be finite");
        for (std::size_t j = i + 1; j < values_.size(); ++j)
            if (values_[i] == values_[j])
                throw std::invalid_argument("controls: duplicate control value " +
                                            std::to_string(values_[i]));
    }
}

ControlSet ControlSet::linear(double lower, double upper, int count) {
    if (count < 1) throw std::invalid_argument("controls: count must be >= 1");
    if (count == 1) return ControlSet({lower});
    if (!(lower < upper))
        throw std::invalid_argument("controls: lower must be < upper");
    std::vector<double> values(static_cast<std::size_t>(count));
    const double step = (upper - lower) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i)
        values[static_cast<std::size_t>(i)] = lower + static_cast<double>(i) * step;
    return ControlSet(std::move(values));
}

int ControlSet::index_of(double u) const {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] == u) return static_cast<int>(i);
    return -1;
}

int ControlSet::nearest_index(double u) const {
    int best = 0;
    double best_dist = std::abs(values_[0] - u);
    for (std::size_t i = 1; i < values_.size(); ++i) {
        const double d = std::abs(values_[i] - u);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

void Scenario::validate() const {
    if (!kernel) throw std::invalid_argument("scenario: kernel is missing");
    if (!target) throw std::invalid_argument("scenario: target set is missing");
    if (!obstacle) throw std::invalid_argument("scenario: obstacle set is missing");
    if (controls.size() < 1) throw std::invalid_argument("controls: control set is empty");
    if (grid.ndims() != kernel->dimension())
        throw std::invalid_argument("grid: dimension " + std::to_string(grid.ndims()) +
                                    " does not match kernel dimension " +
                                    std::to_string(kernel->dimension()));
    if (horizon < 0) throw std::invalid_argument("horizon: must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("gamma: must lie in [0, 1]");
    if (samples < 1) throw std::invalid_argument("samples: must be >= 1");
}

std::vector<State> draw_samples(const StochasticKernel& kernel, const State& s, double u,
                                RngStream& rng, int m) {
    if (m < 1) throw std::invalid_argument("draw_samples: m must be >= 1");
    std::vector<State> out(static_cast<std::size_t>(m));
    kernel.sample_batch(s, u, rng, out);
    return out;
}

TimeVaryingSet moving_box(std::function<State(int)> center_of_k,
                          std::vector<double> half_widths) {
    return [center = std::move(center_of_k),
            hw = std::move(half_widths)](const State& s, int k) {
        const State c = center(k);
        for (std::size_t d = 0; d < hw.size(); ++d) {
            const double lo = c[static_cast<int>(d)] - hw[d];
            const double hi = c[static_cast<int>(d)] + hw[d];
            const double x = s[static_cast<int>(d)];
            if (x < lo || x > hi) return false;
        }
        return true;
    };
}

} // namespace reachprob
