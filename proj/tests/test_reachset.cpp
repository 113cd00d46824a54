#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "reachprob/reachset.hpp"
#include "reachprob/rng.hpp"

using namespace reachprob;

namespace {

ValueField random_field3(std::uint64_t seed) {
    GridSpec g({{-1.0, 1.0, 5, false}, {-1.0, 1.0, 4, false}, {-2.0, 2.0, 3, true}});
    RngStream rng(seed);
    std::vector<double> values(g.total_points());
    for (auto& v : values) v = rng.next_double();
    return ValueField(g, 0, std::move(values));
}

} // namespace

TEST_CASE("membership uses the closed threshold") {
    GridSpec g({{0.0, 1.0, 2, false}});
    ValueField f(g, 0, {0.6, 0.6});
    CHECK(member(LevelQuery(f, 0.6), {0.3}));
    CHECK(member(LevelQuery(f, 0.0), {0.3}));
    CHECK_FALSE(member(LevelQuery(f, 0.61), {0.3}));

    ValueField half(g, 0, {0.5, 0.5});
    CHECK_FALSE(member(LevelQuery(half, 0.6), {0.99}));
    CHECK_THROWS_AS(LevelQuery(half, 1.5), std::invalid_argument);
}

TEST_CASE("grid classification and gamma monotonicity") {
    ValueField f = random_field3(31);
    const auto all = classify_grid(LevelQuery(f, 0.0));
    for (auto m : all) CHECK(m == 1);
    const auto none = classify_grid(LevelQuery(f, 1.0));
    bool any = false;
    for (auto m : none) any = any || m == 1;
    CHECK_FALSE(any); // no value reaches 1.0 in this random field

    const auto lo = classify_grid(LevelQuery(f, 0.3));
    const auto hi = classify_grid(LevelQuery(f, 0.7));
    for (std::size_t p = 0; p < lo.size(); ++p) {
        if (hi[p]) CHECK(lo[p]); // higher threshold selects a subset
    }

    // member agrees with classify_grid at grid points.
    LevelQuery q(f, 0.5);
    const auto mask = classify_grid(q);
    for (std::size_t p = 0; p < mask.size(); ++p)
        CHECK(member(q, f.spec().point_of_flat(p)) == (mask[p] == 1));
}

TEST_CASE("slice shapes and fixed-plane exactness") {
    ValueField f = random_field3(77);
    const GridSpec& g = f.spec();

    SliceTable t = slice(f, {{2, 0.0}}); // theta pinned at the middle grid plane
    CHECK(t.axis1 == 0);
    CHECK(t.axis2 == 1);
    REQUIRE(t.rows.size() == 5u * 4u);
    // Row-major in the free axes, and node-exact on a grid plane.
    std::size_t r = 0;
    for (std::int64_t i = 0; i < 5; ++i) {
        for (std::int64_t j = 0; j < 4; ++j, ++r) {
            const std::int64_t idx[] = {i, j, 1};
            const State s = g.point_of_index(idx);
            CHECK(t.rows[r].coord1 == s[0]);
            CHECK(t.rows[r].coord2 == s[1]);
            CHECK(t.rows[r].value ==
                  f.value_at(static_cast<std::size_t>(i) * g.stride(0) +
                             static_cast<std::size_t>(j) * g.stride(1) + g.stride(2)));
        }
    }

    SUBCASE("constant fields slice to the constant") {
        ValueField c(g, 0, std::vector<double>(g.total_points(), 0.25));
        for (const auto& row : slice(c, {{0, 0.37}}).rows) CHECK(row.value == 0.25);
    }
    SUBCASE("free-axis count is enforced") {
        CHECK_THROWS_AS(slice(f, {}), std::invalid_argument);
        CHECK_THROWS_AS(slice(f, {{0, 0.0}, {1, 0.0}, {2, 0.0}}), std::invalid_argument);
        CHECK_THROWS_AS(slice(f, {{7, 0.0}}), std::invalid_argument);
    }
}

TEST_CASE("slice CSV carries full precision") {
    GridSpec g({{0.0, 1.0, 2, false}, {0.0, 1.0, 2, false}, {0.0, 1.0, 2, false}});
    std::vector<double> values(8, 0.0);
    values[0] = 1.0 / 3.0;
    ValueField f(g, 0, std::move(values));
    SliceTable t = slice(f, {{2, 0.0}});

    const auto path = std::filesystem::temp_directory_path() / "slice_test.csv";
    write_slice_csv(t, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "axis1,axis2,value");
    std::string line;
    std::getline(in, line);
    const auto last_comma = line.rfind(',');
    const double parsed = std::strtod(line.c_str() + last_comma + 1, nullptr);
    CHECK(parsed == 1.0 / 3.0); // 17 significant digits round-trip
    std::filesystem::remove(path);
}
