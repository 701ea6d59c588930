#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "uavcov/error.hpp"
#include "uavcov/rng.hpp"
#include "uavcov/terrain.hpp"

using namespace uavcov;

namespace {

HeightGrid parse(const std::string& text) {
    std::istringstream in(text);
    return parse_surface_raster(in);
}

std::string header(int cols, int rows, const std::string& cellsize = "1.0") {
    return "ncols " + std::to_string(cols) + "\nnrows " + std::to_string(rows) +
           "\nxllcorner 0\nyllcorner 0\ncellsize " + cellsize + "\nNODATA_value -9999\n";
}

std::string raster_text(const HeightGrid& g) {
    std::ostringstream out;
    write_surface_raster(out, g);
    return out.str();
}

} // namespace

TEST_CASE("raster: 2x2 example echoes rows north first") {
    const auto g = parse(header(2, 2) + "5 5\n5 30\n");
    CHECK(g.rows() == 2);
    CHECK(g.cols() == 2);
    CHECK(g.at(0, 0) == 5.0);
    CHECK(g.at(1, 0) == 5.0);
    CHECK(g.at(0, 1) == 5.0);
    CHECK(g.at(1, 1) == 30.0);
}

TEST_CASE("raster: header keys are case-insensitive") {
    const auto g = parse("NCOLS 2\nNRows 2\nXLLCORNER 10\nyllCorner 20\nCellSize 1\nnodata_value -1\n1 2\n3 4\n");
    CHECK(g.at(1, 1) == 4.0);
    CHECK(g.origin_x() == 10.0);
    CHECK(g.origin_y() == 20.0);
}

TEST_CASE("raster: row width mismatch is a dimension error") {
    CHECK_THROWS_AS(parse(header(3, 2) + "5 5\n5 30\n"), DimensionError);
}

TEST_CASE("raster: wrong row count is a dimension error") {
    CHECK_THROWS_AS(parse(header(2, 3) + "5 5\n5 30\n"), DimensionError);
}

TEST_CASE("raster: cellsize other than 1 is rejected") {
    CHECK_THROWS_AS(parse(header(2, 2, "5.0") + "5 5\n5 30\n"), UnsupportedResolutionError);
}

TEST_CASE("raster: malformed header names the key") {
    try {
        parse("ncols two\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 1\n1 2\n3 4\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.key() == "ncols");
    }
    try {
        parse("ncols 2\nnrows 2\nxllcorner 0\ncellsize 1\n1 2\n3 4\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.key() == "yllcorner");
    }
}

TEST_CASE("raster: nodata cells are flagged and read as zero") {
    const auto g = parse(header(2, 2) + "-9999 5\n5 30\n");
    CHECK(g.is_nodata(0, 0));
    CHECK_FALSE(g.is_nodata(1, 0));
    CHECK(g.at(0, 0) == 0.0);
    CHECK(g.nodata_count() == 1);
    CHECK(raster_text(g).find("-9999 5") != std::string::npos);
}

TEST_CASE("raster: negative heights are rejected") {
    CHECK_THROWS_AS(parse(header(2, 2) + "-3 5\n5 30\n"), ParseError);
}

TEST_CASE("raster: write then parse reproduces the grid exactly") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto cols = static_cast<std::size_t>(rng.uniform_int(2, 17));
        const auto rows = static_cast<std::size_t>(rng.uniform_int(2, 11));
        HeightGrid g(rows, cols);
        g.set_origin(rng.uniform(-1000, 1000), rng.uniform(-1000, 1000));
        for (std::size_t y = 0; y < rows; ++y) {
            for (std::size_t x = 0; x < cols; ++x) {
                if (rng.uniform() < 0.05) g.mark_nodata(x, y);
                else g.set(x, y, rng.uniform(0.0, 120.0));
            }
        }
        const auto back = parse(raster_text(g));
        CHECK(back == g);
        CHECK(raster_text(back) == raster_text(g));
    }
}

TEST_CASE("min_safe_altitude: clearance examples") {
    auto terrain = fixtures::flat_grid(3, 2, 5.0);
    auto surface = terrain;
    surface.set(1, 0, 30.0);
    surface.set(2, 0, 6.5);
    const auto sc = fixtures::scenario(terrain, surface);
    CHECK(min_safe_altitude(sc, 0, 0) == 15.0);
    CHECK(min_safe_altitude(sc, 1, 0) == 33.0);
    CHECK(min_safe_altitude(sc, 2, 0) == 15.0);
    CHECK_FALSE(sc.is_building(2, 0));
    CHECK(sc.is_building(1, 0));
    CHECK_THROWS_AS(min_safe_altitude(sc, 3, 0), BoundsError);
    CHECK_THROWS_AS(min_safe_altitude(sc, -1, 0), BoundsError);
}

TEST_CASE("min_safe_altitude: a low roof keeps the terrain clearance") {
    auto terrain = fixtures::flat_grid(2, 2, 0.0);
    auto surface = terrain;
    surface.set(0, 0, 4.0);
    const auto sc = fixtures::scenario(terrain, surface);
    CHECK(sc.is_building(0, 0));
    CHECK(min_safe_altitude(sc, 0, 0) == 10.0);
}

TEST_CASE("scenario: construction checks") {
    auto t = fixtures::flat_grid(4, 4, 2.0);
    auto low = fixtures::flat_grid(4, 4, 1.0);
    CHECK_THROWS_AS(fixtures::scenario(t, low), ScenarioError);
    CHECK_THROWS_AS(fixtures::scenario(t, fixtures::flat_grid(5, 4, 2.0)), ScenarioError);
    CHECK_THROWS_AS(CityScenario(t, t, {}, Roi{0, 0, 5, 4}), ScenarioError);
    CHECK_THROWS_AS(fixtures::scenario(t, t, {{"a", 1, 1, 25}, {"a", 2, 2, 25}}), ScenarioError);
    CHECK_THROWS_AS(fixtures::scenario(t, t, {{"a", 9, 1, 25}}), ScenarioError);
    CHECK_THROWS_AS(fixtures::scenario(t, t, {{"a", 1, 1, 0}}), ScenarioError);
}

TEST_CASE("scenario: antenna stands mast_height above the terrain") {
    auto t = fixtures::flat_grid(4, 4, 2.0);
    auto s = t;
    s.set(1, 1, 20.0);
    const auto sc = fixtures::scenario(t, s, {{"a", 1, 1, 25}});
    CHECK(sc.antenna_height(sc.stations()[0]) == 27.0);
}

TEST_CASE("generate_city: reference example") {
    CityParams p;
    p.width_m = 400;
    p.height_m = 400;
    p.block_pitch_m = 50;
    p.street_width_m = 10;
    p.building_min_m = 6;
    p.building_max_m = 40;
    p.terrain_amplitude_m = 0;
    p.n_stations = 8;
    p.mast_height_m = 25;
    p.roi_buffer_m = 50;
    const auto sc = generate_city(p, 7);
    CHECK(sc.stations().size() == 8);
    CHECK(sc.surface().max_height() <= 40.0);
    CHECK(sc.terrain().max_height() == 0.0);
    CHECK(sc.roi().x0 == 50);
    CHECK(sc.roi().x1 == 350);
    for (const auto& s : sc.stations()) {
        const auto x = static_cast<std::size_t>(s.x);
        const auto y = static_cast<std::size_t>(s.y);
        CHECK(sc.antenna_height(s) == doctest::Approx(sc.surface().at(x, y) + 25.0));
    }
}

TEST_CASE("generate_city: identical inputs give identical rasters") {
    const auto p = fixtures::small_city();
    const auto a = generate_city(p, 11);
    const auto b = generate_city(p, 11);
    CHECK(a == b);
    CHECK(raster_text(a.surface()) == raster_text(b.surface()));
    CHECK(raster_text(a.terrain()) == raster_text(b.terrain()));
    CHECK_FALSE(generate_city(p, 12) == a);
}

TEST_CASE("generate_city: degenerate height distribution leaves no buildings") {
    auto p = fixtures::small_city();
    p.building_min_m = 0;
    p.building_max_m = 0;
    const auto sc = generate_city(p, 3);
    CHECK(sc.surface() == sc.terrain());
    for (std::size_t y = 0; y < sc.rows(); ++y) {
        for (std::size_t x = 0; x < sc.cols(); ++x) CHECK_FALSE(sc.is_building(x, y));
    }
}

TEST_CASE("generate_city: infeasible parameters") {
    auto p = fixtures::small_city();
    p.street_width_m = 50;
    CHECK_THROWS_AS(generate_city(p, 1), ParameterError);
    p = fixtures::small_city();
    p.width_m = 100;
    CHECK_THROWS_AS(generate_city(p, 1), ParameterError);
    p = fixtures::small_city();
    p.n_stations = 0;
    CHECK_THROWS_AS(generate_city(p, 1), ParameterError);
    p = fixtures::small_city();
    p.building_min_m = 10;
    p.building_max_m = 5;
    CHECK_THROWS_AS(generate_city(p, 1), ParameterError);
}

TEST_CASE("generate_city: structural properties over many seeds") {
    auto p = fixtures::small_city();
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        p.n_stations = 1 + static_cast<int>(seed % 6);
        const auto sc = generate_city(p, seed);
        REQUIRE(sc.stations().size() == static_cast<std::size_t>(p.n_stations));
        bool inside = false;
        for (const auto& s : sc.stations()) inside |= sc.roi().contains(std::lround(s.x), std::lround(s.y));
        CHECK(inside);
        CHECK(sc.terrain().min_height() >= 0.0);
        CHECK(sc.terrain().max_height() <= p.terrain_amplitude_m);
        for (std::size_t y = 0; y < sc.rows(); ++y) {
            for (std::size_t x = 0; x < sc.cols(); ++x) {
                const double t = sc.terrain().at(x, y);
                const double s = sc.surface().at(x, y);
                REQUIRE(s >= t);
                const double roof = s - t;
                if (roof > 0.0) {
                    REQUIRE(roof >= p.building_min_m);
                    REQUIRE(roof <= p.building_max_m);
                }
                const double m = min_safe_altitude(sc, static_cast<long>(x), static_cast<long>(y));
                REQUIRE(m >= t + kTerrainClearance);
                if (sc.is_building(x, y)) REQUIRE(m >= s + kBuildingGuard);
            }
        }
    }
}

TEST_CASE("generate_city: stations sit on street cells at mast height") {
    auto p = fixtures::small_city();
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const auto sc = generate_city(p, seed);
        for (const auto& s : sc.stations()) {
            CHECK(s.x == std::round(s.x));
            CHECK(s.y == std::round(s.y));
            const auto x = static_cast<std::size_t>(s.x);
            const auto y = static_cast<std::size_t>(s.y);
            CHECK(sc.surface().at(x, y) == sc.terrain().at(x, y));
            CHECK(sc.antenna_height(s) == sc.surface().at(x, y) + p.mast_height_m);
        }
    }
}

TEST_CASE("generate_city: street lattice leaves open corridors") {
    const auto p = fixtures::small_city();
    const auto sc = generate_city(p, 5);
    // Row 0 and column 0 sit on the half-street at the lattice boundary.
    for (std::size_t x = 0; x < sc.cols(); ++x) CHECK(sc.surface().at(x, 0) == sc.terrain().at(x, 0));
    for (std::size_t y = 0; y < sc.rows(); ++y) CHECK(sc.surface().at(0, y) == sc.terrain().at(0, y));
    // Block interiors are flat-topped above the terrain.
    const double roof = sc.surface().at(20, 20) - sc.terrain().at(20, 20);
    CHECK(sc.surface().at(25, 25) - sc.terrain().at(25, 25) == doctest::Approx(roof));
}

TEST_CASE("descriptor: raster files and stations round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "uavcov_test_terrain";
    std::filesystem::create_directories(dir);
    const auto sc = generate_city(fixtures::small_city(), 21);
    save_surface_raster((dir / "dtm.asc").string(), sc.terrain());
    save_surface_raster((dir / "dsm.asc").string(), sc.surface());
    {
        std::ofstream out(dir / "scenario.json");
        out << scenario_descriptor(sc, "dtm.asc", "dsm.asc").dump(2);
    }
    const auto back = load_scenario_file((dir / "scenario.json").string());
    CHECK(back == sc);
    REQUIRE(back.provenance().has_value());
    CHECK(back.provenance()->second == 21);
    std::filesystem::remove_all(dir);
}

TEST_CASE("descriptor: generator form needs a seed and known keys") {
    nlohmann::json d = {{"generator", city_params_to_json(fixtures::small_city())}};
    CHECK_THROWS_AS(load_scenario(d, "."), ConfigError);
    d["seed"] = 4;
    CHECK(load_scenario(d, ".") == generate_city(fixtures::small_city(), 4));
    d["generator"]["bogus"] = 1;
    CHECK_THROWS_AS(load_scenario(d, "."), ConfigError);
    CHECK(city_params_from_json(city_params_to_json(fixtures::small_city())) == fixtures::small_city());
}
