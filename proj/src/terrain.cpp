#include "uavcov/terrain.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "uavcov/error.hpp"
#include "uavcov/rng.hpp"

namespace uavcov {

HeightGrid::HeightGrid(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), heights_(rows * cols, fill), nodata_(rows * cols, 0) {}

void HeightGrid::mark_nodata(std::size_t x, std::size_t y) {
    nodata_[y * cols_ + x] = 1;
    heights_[y * cols_ + x] = 0.0;
}

std::size_t HeightGrid::nodata_count() const noexcept {
    return static_cast<std::size_t>(std::count(nodata_.begin(), nodata_.end(), std::uint8_t{1}));
}

double HeightGrid::max_height() const noexcept {
    return heights_.empty() ? 0.0 : *std::max_element(heights_.begin(), heights_.end());
}

double HeightGrid::min_height() const noexcept {
    return heights_.empty() ? 0.0 : *std::min_element(heights_.begin(), heights_.end());
}

// ---------------------------------------------------------------------------
// ESRI ASCII grid

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool parse_double(std::string_view token, double& out) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

bool looks_like_key(std::string_view token) {
    return !token.empty() && std::isalpha(static_cast<unsigned char>(token.front()));
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

} // namespace

HeightGrid parse_surface_raster(std::istream& in) {
    std::optional<double> ncols, nrows, xll, yll, cellsize, nodata;
    bool centered = false;

    std::string line;
    std::vector<std::string> data_lines;
    while (std::getline(in, line)) {
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (!data_lines.empty() || !looks_like_key(tokens.front())) {
            data_lines.push_back(line);
            continue;
        }
        const std::string key = lower(std::string(tokens.front()));
        if (tokens.size() != 2) throw ParseError(key, "expected exactly one value");
        double value = 0.0;
        if (!parse_double(tokens[1], value)) throw ParseError(key, "value '" + std::string(tokens[1]) + "' is not a number");
        if (key == "ncols") ncols = value;
        else if (key == "nrows") nrows = value;
        else if (key == "xllcorner") xll = value;
        else if (key == "yllcorner") yll = value;
        else if (key == "xllcenter") { xll = value; centered = true; }
        else if (key == "yllcenter") { yll = value; centered = true; }
        else if (key == "cellsize") cellsize = value;
        else if (key == "nodata_value") nodata = value;
        else throw ParseError(key, "unknown header key");
    }

    auto require = [](const std::optional<double>& v, const char* key) {
        if (!v) throw ParseError(key, "missing header key");
        return *v;
    };
    const double cols_d = require(ncols, "ncols");
    const double rows_d = require(nrows, "nrows");
    require(xll, "xllcorner");
    require(yll, "yllcorner");
    const double cs = require(cellsize, "cellsize");
    for (auto [v, key] : {std::pair{cols_d, "ncols"}, std::pair{rows_d, "nrows"}}) {
        if (v != std::floor(v) || v < 0) throw ParseError(key, "must be a non-negative integer");
    }
    if (cs != 1.0) throw UnsupportedResolutionError("cellsize " + format_number(cs) + " unsupported; only 1 m grids are accepted");

    const auto cols = static_cast<std::size_t>(cols_d);
    const auto rows = static_cast<std::size_t>(rows_d);
    if (rows < 2 || cols < 2) throw DimensionError("grid must be at least 2x2");
    if (data_lines.size() != rows) {
        throw DimensionError("expected " + std::to_string(rows) + " data rows, found " + std::to_string(data_lines.size()));
    }

    HeightGrid grid(rows, cols);
    const double nodata_value = nodata.value_or(kNoData);
    grid.set_nodata_value(nodata_value);
    const double half = centered ? 0.5 : 0.0;
    grid.set_origin(*xll - half, *yll - half);

    for (std::size_t r = 0; r < rows; ++r) {
        const auto tokens = split_ws(data_lines[r]);
        if (tokens.size() != cols) {
            throw DimensionError("row " + std::to_string(r) + " has " + std::to_string(tokens.size()) + " values, expected " +
                                 std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) {
            double v = 0.0;
            if (!parse_double(tokens[c], v)) {
                throw ParseError("row " + std::to_string(r), "value '" + std::string(tokens[c]) + "' is not a number");
            }
            if (nodata && v == nodata_value) {
                grid.mark_nodata(c, r);
                continue;
            }
            if (!std::isfinite(v) || v < 0.0) {
                throw ParseError("row " + std::to_string(r), "height " + std::string(tokens[c]) + " must be finite and >= 0");
            }
            grid.set(c, r, v);
        }
    }
    return grid;
}

HeightGrid load_surface_raster(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open raster '" + path + "'");
    return parse_surface_raster(in);
}

void write_surface_raster(std::ostream& out, const HeightGrid& grid) {
    out << "ncols " << grid.cols() << '\n'
        << "nrows " << grid.rows() << '\n'
        << "xllcorner " << format_number(grid.origin_x()) << '\n'
        << "yllcorner " << format_number(grid.origin_y()) << '\n'
        << "cellsize 1\n"
        << "NODATA_value " << format_number(grid.nodata_value()) << '\n';
    std::string row;
    for (std::size_t y = 0; y < grid.rows(); ++y) {
        row.clear();
        for (std::size_t x = 0; x < grid.cols(); ++x) {
            if (x) row += ' ';
            row += format_number(grid.is_nodata(x, y) ? grid.nodata_value() : grid.at(x, y));
        }
        row += '\n';
        out << row;
    }
}

void save_surface_raster(const std::string& path, const HeightGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write raster '" + path + "'");
    write_surface_raster(out, grid);
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Scenario

CityScenario::CityScenario(HeightGrid terrain, HeightGrid surface, std::vector<BaseStation> stations, Roi roi,
                           double building_threshold)
    : terrain_(std::move(terrain)),
      surface_(std::move(surface)),
      stations_(std::move(stations)),
      roi_(roi),
      building_threshold_(building_threshold) {
    if (!terrain_.same_shape(surface_)) throw ScenarioError("terrain and surface grids differ in shape or origin");
    if (terrain_.rows() < 2 || terrain_.cols() < 2) throw ScenarioError("grids must be at least 2x2");
    for (std::size_t y = 0; y < rows(); ++y) {
        for (std::size_t x = 0; x < cols(); ++x) {
            if (surface_.at(x, y) < terrain_.at(x, y)) {
                throw ScenarioError("surface below terrain at (" + std::to_string(x) + ", " + std::to_string(y) + ")");
            }
        }
    }
    if (roi_.x0 < 0 || roi_.y0 < 0 || roi_.x1 > static_cast<long>(cols()) || roi_.y1 > static_cast<long>(rows()) ||
        roi_.width() <= 0 || roi_.height() <= 0) {
        throw ScenarioError("region of interest must be a non-empty box inside the grid");
    }
    if (!(building_threshold_ >= 0.0)) throw ScenarioError("building_threshold must be >= 0");
    std::set<std::string> ids;
    for (const auto& s : stations_) {
        if (!ids.insert(s.id).second) throw ScenarioError("duplicate station id '" + s.id + "'");
        if (!terrain_.contains(std::lround(s.x), std::lround(s.y))) {
            throw ScenarioError("station '" + s.id + "' lies outside the grid");
        }
        if (!(s.mast_height > 0.0)) throw ScenarioError("station '" + s.id + "' needs mast_height > 0");
    }
}

double CityScenario::antenna_height(const BaseStation& s) const {
    return terrain_.at(static_cast<std::size_t>(std::lround(s.x)), static_cast<std::size_t>(std::lround(s.y))) +
           s.mast_height;
}

double min_safe_altitude(const CityScenario& scenario, long x, long y) {
    if (!scenario.terrain().contains(x, y)) {
        throw BoundsError("cell (" + std::to_string(x) + ", " + std::to_string(y) + ") outside the grid");
    }
    const auto ux = static_cast<std::size_t>(x);
    const auto uy = static_cast<std::size_t>(y);
    const double over_terrain = scenario.terrain().at(ux, uy) + kTerrainClearance;
    if (!scenario.is_building(ux, uy)) return over_terrain;
    return std::max(over_terrain, scenario.surface().at(ux, uy) + kBuildingGuard);
}

// ---------------------------------------------------------------------------
// Procedural city

namespace {

void validate(const CityParams& p) {
    if (!(p.block_pitch_m > 0.0)) throw ParameterError("block_pitch_m must be > 0");
    if (!(p.width_m >= 4.0 * p.block_pitch_m) || !(p.height_m >= 4.0 * p.block_pitch_m)) {
        throw ParameterError("width_m and height_m must be at least 4 x block_pitch_m");
    }
    if (!(p.street_width_m >= 0.0) || p.street_width_m >= p.block_pitch_m) {
        throw ParameterError("street_width_m must be in [0, block_pitch_m)");
    }
    if (!(p.building_min_m >= 0.0) || !(p.building_max_m >= p.building_min_m)) {
        throw ParameterError("building heights need 0 <= min <= max");
    }
    if (!(p.terrain_amplitude_m >= 0.0)) throw ParameterError("terrain_amplitude_m must be >= 0");
    if (p.n_stations < 1) throw ParameterError("n_stations must be >= 1");
    if (!(p.mast_height_m > 0.0)) throw ParameterError("mast_height_m must be > 0");
    if (!(p.roi_buffer_m >= 0.0) || 2.0 * p.roi_buffer_m >= std::min(p.width_m, p.height_m)) {
        throw ParameterError("roi_buffer_m must leave a non-empty region of interest");
    }
}

struct Wave {
    double kx, ky, phase, weight;
};

} // namespace

CityScenario generate_city(const CityParams& p, std::uint64_t seed) {
    validate(p);
    const auto cols = static_cast<std::size_t>(std::lround(p.width_m));
    const auto rows = static_cast<std::size_t>(std::lround(p.height_m));
    Rng rng(seed);

    // Terrain: a few long-wavelength plane waves rescaled to [0, amplitude].
    HeightGrid terrain(rows, cols, 0.0);
    std::array<Wave, 3> waves{};
    const double extent = std::max(p.width_m, p.height_m);
    for (std::size_t i = 0; i < waves.size(); ++i) {
        const double wavelength = extent * (1.5 / static_cast<double>(i + 1));
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double k = 2.0 * std::numbers::pi / wavelength;
        waves[i] = {k * std::cos(angle), k * std::sin(angle), rng.uniform(0.0, 2.0 * std::numbers::pi),
                    1.0 / static_cast<double>(i + 1)};
    }
    if (p.terrain_amplitude_m > 0.0) {
        std::vector<double> raw(rows * cols);
        for (std::size_t y = 0; y < rows; ++y) {
            for (std::size_t x = 0; x < cols; ++x) {
                double v = 0.0;
                for (const auto& w : waves) v += w.weight * std::sin(w.kx * x + w.ky * y + w.phase);
                raw[y * cols + x] = v;
            }
        }
        const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
        const double span = *hi - *lo;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double t = span > 0.0 ? (raw[i] - *lo) / span : 0.0;
            terrain.set(i % cols, i / cols, std::clamp(t * p.terrain_amplitude_m, 0.0, p.terrain_amplitude_m));
        }
    }

    // Buildings: one flat-topped block per lattice tile, streets centred on
    // the tile boundaries.
    const auto blocks_x = static_cast<std::size_t>(std::ceil(p.width_m / p.block_pitch_m));
    const auto blocks_y = static_cast<std::size_t>(std::ceil(p.height_m / p.block_pitch_m));
    std::vector<double> block_height(blocks_x * blocks_y);
    for (auto& h : block_height) h = rng.uniform(p.building_min_m, p.building_max_m);

    const double half_street = 0.5 * p.street_width_m;
    auto in_block = [&](std::size_t i) {
        const double u = std::fmod(static_cast<double>(i) + 0.5, p.block_pitch_m);
        return u >= half_street && u <= p.block_pitch_m - half_street;
    };
    HeightGrid surface = terrain;
    for (std::size_t y = 0; y < rows; ++y) {
        if (!in_block(y)) continue;
        const auto by = static_cast<std::size_t>((static_cast<double>(y) + 0.5) / p.block_pitch_m);
        for (std::size_t x = 0; x < cols; ++x) {
            if (!in_block(x)) continue;
            const auto bx = static_cast<std::size_t>((static_cast<double>(x) + 0.5) / p.block_pitch_m);
            surface.set(x, y, terrain.at(x, y) + block_height[by * blocks_x + bx]);
        }
    }

    Roi roi;
    const auto buffer = std::lround(p.roi_buffer_m);
    roi.x0 = buffer;
    roi.y0 = buffer;
    roi.x1 = static_cast<long>(cols) - buffer;
    roi.y1 = static_cast<long>(rows) - buffer;

    // Stations: jittered grid, one per selected tile.
    const auto n = static_cast<std::size_t>(p.n_stations);
    const auto gx = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(n * p.width_m / p.height_m))));
    const auto gy = (n + gx - 1) / gx;
    std::vector<std::size_t> tiles(gx * gy);
    for (std::size_t i = 0; i < tiles.size(); ++i) tiles[i] = i;
    for (std::size_t i = tiles.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
        std::swap(tiles[i - 1], tiles[j]);
    }
    tiles.resize(n);
    std::sort(tiles.begin(), tiles.end());

    const double tile_w = static_cast<double>(cols) / static_cast<double>(gx);
    const double tile_h = static_cast<double>(rows) / static_cast<double>(gy);
    auto clamp_cell = [](double v, std::size_t limit) {
        return std::clamp(std::round(v), 0.0, static_cast<double>(limit - 1));
    };
    std::vector<BaseStation> stations;
    stations.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tx = static_cast<double>(tiles[i] % gx);
        const double ty = static_cast<double>(tiles[i] / gx);
        const double x = (tx + rng.uniform()) * tile_w;
        const double y = (ty + rng.uniform()) * tile_h;
        char id[32];
        std::snprintf(id, sizeof id, "bs%02zu", i);
        stations.push_back({id, clamp_cell(x, cols), clamp_cell(y, rows), p.mast_height_m});
    }
    const bool any_inside = std::any_of(stations.begin(), stations.end(), [&](const BaseStation& s) {
        return roi.contains(std::lround(s.x), std::lround(s.y));
    });
    if (!any_inside) {
        const double cx = 0.5 * (roi.x0 + roi.x1);
        const double cy = 0.5 * (roi.y0 + roi.y1);
        auto nearest = std::min_element(stations.begin(), stations.end(), [&](const auto& a, const auto& b) {
            return std::hypot(a.x - cx, a.y - cy) < std::hypot(b.x - cx, b.y - cy);
        });
        nearest->x = static_cast<double>(rng.uniform_int(roi.x0, roi.x1 - 1));
        nearest->y = static_cast<double>(rng.uniform_int(roi.y0, roi.y1 - 1));
    }

    // Each site moves to the nearest open street cell within one block pitch,
    // staying inside the ROI when it started there.
    const long reach = static_cast<long>(p.block_pitch_m);
    for (auto& s : stations) {
        const long sx = std::lround(s.x), sy = std::lround(s.y);
        const Roi box = roi.contains(sx, sy) ? roi : Roi{0, 0, static_cast<long>(cols), static_cast<long>(rows)};
        double best = std::numeric_limits<double>::infinity();
        long bx = sx, by = sy;
        for (long y = std::max(box.y0, sy - reach); y < std::min(box.y1, sy + reach + 1); ++y) {
            for (long x = std::max(box.x0, sx - reach); x < std::min(box.x1, sx + reach + 1); ++x) {
                const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
                if (surface.at(ux, uy) != terrain.at(ux, uy)) continue;
                const double d = std::hypot(static_cast<double>(x - sx), static_cast<double>(y - sy));
                if (d < best) {
                    best = d;
                    bx = x;
                    by = y;
                }
            }
        }
        s.x = static_cast<double>(bx);
        s.y = static_cast<double>(by);
    }
    // Masts stand on the rooftop (or street) at the station's cell; the stored
    // height is measured from the bare terrain.
    for (auto& s : stations) {
        const auto cx = static_cast<std::size_t>(s.x);
        const auto cy = static_cast<std::size_t>(s.y);
        s.mast_height = surface.at(cx, cy) - terrain.at(cx, cy) + p.mast_height_m;
    }

    CityScenario scenario(std::move(terrain), std::move(surface), std::move(stations), roi);
    scenario.set_provenance(p, seed);
    return scenario;
}

// ---------------------------------------------------------------------------
// JSON descriptors

nlohmann::json city_params_to_json(const CityParams& p) {
    return {
        {"width_m", p.width_m},
        {"height_m", p.height_m},
        {"block_pitch_m", p.block_pitch_m},
        {"street_width_m", p.street_width_m},
        {"building_height_distribution", {{"min", p.building_min_m}, {"max", p.building_max_m}}},
        {"terrain_amplitude_m", p.terrain_amplitude_m},
        {"n_stations", p.n_stations},
        {"mast_height_m", p.mast_height_m},
        {"roi_buffer_m", p.roi_buffer_m},
    };
}

CityParams city_params_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known = {"width_m",          "height_m",       "block_pitch_m",
                                                "street_width_m",   "building_height_distribution",
                                                "terrain_amplitude_m", "n_stations", "mast_height_m",
                                                "roi_buffer_m"};
    if (!j.is_object()) throw ConfigError("generator params must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown generator parameter '" + key + "'");
    }
    CityParams p;
    try {
        p.width_m = j.value("width_m", p.width_m);
        p.height_m = j.value("height_m", p.height_m);
        p.block_pitch_m = j.value("block_pitch_m", p.block_pitch_m);
        p.street_width_m = j.value("street_width_m", p.street_width_m);
        if (j.contains("building_height_distribution")) {
            const auto& d = j.at("building_height_distribution");
            p.building_min_m = d.value("min", p.building_min_m);
            p.building_max_m = d.value("max", p.building_max_m);
        }
        p.terrain_amplitude_m = j.value("terrain_amplitude_m", p.terrain_amplitude_m);
        p.n_stations = j.value("n_stations", p.n_stations);
        p.mast_height_m = j.value("mast_height_m", p.mast_height_m);
        p.roi_buffer_m = j.value("roi_buffer_m", p.roi_buffer_m);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid generator parameter: ") + e.what());
    }
    return p;
}

nlohmann::json scenario_descriptor(const CityScenario& scenario, const std::string& terrain_file,
                                   const std::string& surface_file) {
    nlohmann::json stations = nlohmann::json::array();
    for (const auto& s : scenario.stations()) {
        stations.push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}, {"mast_height", s.mast_height}});
    }
    const auto& r = scenario.roi();
    nlohmann::json j = {
        {"terrain_file", terrain_file},
        {"surface_file", surface_file},
        {"stations", stations},
        {"roi", {{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}}},
        {"building_threshold", scenario.building_threshold()},
    };
    if (const auto& prov = scenario.provenance()) {
        j["generator"] = city_params_to_json(prov->first);
        j["seed"] = prov->second;
    }
    return j;
}

CityScenario load_scenario(const nlohmann::json& d, const std::string& base_dir) {
    try {
        if (!d.contains("terrain_file")) {
            if (!d.contains("generator")) throw ConfigError("scenario needs terrain_file/surface_file or generator params");
            if (!d.contains("seed")) throw ConfigError("generator scenarios need an explicit seed");
            return generate_city(city_params_from_json(d.at("generator")), d.at("seed").get<std::uint64_t>());
        }
        const std::filesystem::path base(base_dir);
        auto resolve = [&](const std::string& key) {
            const std::filesystem::path p(d.at(key).get<std::string>());
            return (p.is_absolute() ? p : base / p).string();
        };
        HeightGrid terrain = load_surface_raster(resolve("terrain_file"));
        HeightGrid surface = load_surface_raster(resolve("surface_file"));
        std::vector<BaseStation> stations;
        for (const auto& s : d.at("stations")) {
            stations.push_back({s.at("id").get<std::string>(), s.at("x").get<double>(), s.at("y").get<double>(),
                                s.value("mast_height", 25.0)});
        }
        Roi roi;
        if (d.contains("roi")) {
            const auto& r = d.at("roi");
            roi = {r.at("x0").get<long>(), r.at("y0").get<long>(), r.at("x1").get<long>(), r.at("y1").get<long>()};
        } else {
            roi = {0, 0, static_cast<long>(terrain.cols()), static_cast<long>(terrain.rows())};
        }
        CityScenario scenario(std::move(terrain), std::move(surface), std::move(stations), roi,
                              d.value("building_threshold", 2.0));
        if (d.contains("generator") && d.contains("seed")) {
            scenario.set_provenance(city_params_from_json(d.at("generator")), d.at("seed").get<std::uint64_t>());
        }
        return scenario;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid scenario descriptor: ") + e.what());
    }
}

CityScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario '" + path + "'");
    nlohmann::json d;
    try {
        in >> d;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario '" + path + "' is not valid JSON: " + e.what());
    }
    return load_scenario(d, std::filesystem::path(path).parent_path().string());
}

} // namespace uavcov
