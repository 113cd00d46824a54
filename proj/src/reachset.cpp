#include "reachprob/reachset.hpp"

#include <cstdio>
#include <fstream>

namespace reachprob {

std::vector<std::uint8_t> classify_grid(const LevelQuery& query) {
    const GridSpec& g = query.field.spec();
    std::vector<std::uint8_t> mask(g.total_points());
    for (std::size_t p = 0; p < mask.size(); ++p)
        mask[p] = query.field.value_at(p) >= query.gamma ? 1 : 0;
    return mask;
}

SliceTable slice(const ValueField& field, const std::map<int, double>& fixed_axes) {
    const GridSpec& g = field.spec();
    const int n = g.ndims();
    for (const auto& [axis, coord] : fixed_axes) {
        if (axis < 0 || axis >= n)
            throw std::invalid_argument("slice: axis " + std::to_string(axis) +
                                        " does not exist");
        (void)coord;
    }
    if (static_cast<int>(fixed_axes.size()) != n - 2)
        throw std::invalid_argument("slice: exactly two axes must remain free, got " +
                                    std::to_string(n - static_cast<int>(fixed_axes.size())));

    std::vector<int> free_axes;
    for (int d = 0; d < n; ++d)
        if (!fixed_axes.contains(d)) free_axes.push_back(d);

    SliceTable table;
    table.axis1 = free_axes[0];
    table.axis2 = free_axes[1];
    const AxisSpec& a1 = g.axis(table.axis1);
    const AxisSpec& a2 = g.axis(table.axis2);
    table.rows.reserve(static_cast<std::size_t>(a1.count) * static_cast<std::size_t>(a2.count));

    State s = State::zeros(n);
    for (const auto& [axis, coord] : fixed_axes) s[axis] = coord;
    for (std::int64_t i = 0; i < a1.count; ++i) {
        const double c1 = a1.lower + static_cast<double>(i) * g.spacing(table.axis1);
        s[table.axis1] = c1;
        for (std::int64_t j = 0; j < a2.count; ++j) {
            const double c2 = a2.lower + static_cast<double>(j) * g.spacing(table.axis2);
            s[table.axis2] = c2;
            table.rows.push_back({c1, c2, interpolate(field, s)});
        }
    }
    return table;
}

void write_slice_csv(const SliceTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_slice_csv: cannot open " + path.string());
    out << "axis1,axis2,value\n";
    char buf[128];
    for (const auto& row : table.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", row.coord1, row.coord2,
                      row.value);
        out << buf;
    }
    if (!out) throw std::runtime_error("write_slice_csv: write failed for " + path.string());
}

} // namespace reachprob
