#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "reachprob/grid.hpp"

namespace reachprob {

/// Superlevel-set query over a solved value field, typically V_0: the set
/// of states whose value is at least gamma.
struct LevelQuery {
    const ValueField& field;
    double gamma;

    LevelQuery(const ValueField& f, double g) : field(f), gamma(g) {
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw std::invalid_argument("LevelQuery: gamma must lie in [0, 1]");
    }
};

/// Closed-threshold membership: interpolate(field, s) >= gamma.
inline bool member(const LevelQuery& query, const State& s) {
    return interpolate(query.field, s) >= query.gamma;
}

/// member evaluated at every grid point, in flat row-major order.
std::vector<std::uint8_t> classify_grid(const LevelQuery& query);

/// One plane of a field: coordinates of the two free axes plus the value
/// interpolated at the fixed coordinates.
struct SliceTable {
    int axis1 = 0;  ///< first free axis (lower axis number)
    int axis2 = 1;  ///< second free axis
    struct Row {
        double coord1;
        double coord2;
        double value;
    };
    std::vector<Row> rows;  ///< row-major in the free axes
};

/// Extracts the 2D slice obtained by pinning all but two axes to the given
/// coordinates. Exactly ndims-2 axes must be fixed; axis keys must be valid
/// and distinct. The fixed coordinates need not lie on grid planes.
SliceTable slice(const ValueField& field, const std::map<int, double>& fixed_axes);

/// Writes a slice as CSV: header `axis1,axis2,value`, floats with 17
/// significant digits.
void write_slice_csv(const SliceTable& table, const std::filesystem::path& path);

} // namespace reachprob
