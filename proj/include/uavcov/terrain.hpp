#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace uavcov {

// Grid coordinates: x is the column index, y the row index, row 0 is the
// northernmost raster row. Cell (x, y) is centred on the integer point (x, y)
// and covers [x - 0.5, x + 0.5) x [y - 0.5, y + 0.5).

inline constexpr double kNoData = -9999.0;

/// Uniform 1 m raster of heights above datum.
class HeightGrid {
public:
    HeightGrid() = default;
    HeightGrid(std::size_t rows, std::size_t cols, double fill = 0.0);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double cell_size() const noexcept { return 1.0; }

    double origin_x() const noexcept { return origin_x_; }
    double origin_y() const noexcept { return origin_y_; }
    void set_origin(double x, double y) noexcept { origin_x_ = x; origin_y_ = y; }

    bool contains(long x, long y) const noexcept {
        return x >= 0 && y >= 0 && static_cast<std::size_t>(x) < cols_ && static_cast<std::size_t>(y) < rows_;
    }

    /// Height at column x, row y. Nodata cells read as 0.
    double at(std::size_t x, std::size_t y) const noexcept { return heights_[y * cols_ + x]; }
    void set(std::size_t x, std::size_t y, double h) { heights_[y * cols_ + x] = h; }

    bool is_nodata(std::size_t x, std::size_t y) const noexcept { return nodata_[y * cols_ + x] != 0; }
    void mark_nodata(std::size_t x, std::size_t y);
    std::size_t nodata_count() const noexcept;

    double nodata_value() const noexcept { return nodata_value_; }
    void set_nodata_value(double v) noexcept { nodata_value_ = v; }

    const std::vector<double>& values() const noexcept { return heights_; }

    double max_height() const noexcept;
    double min_height() const noexcept;

    bool same_shape(const HeightGrid& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_ && origin_x_ == other.origin_x_ &&
               origin_y_ == other.origin_y_;
    }

    friend bool operator==(const HeightGrid&, const HeightGrid&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    double origin_x_ = 0.0;
    double origin_y_ = 0.0;
    double nodata_value_ = kNoData;
    std::vector<double> heights_;
    std::vector<std::uint8_t> nodata_;
};

struct BaseStation {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    double mast_height = 25.0; ///< above the bare terrain

    friend bool operator==(const BaseStation&, const BaseStation&) = default;
};

/// Half-open box [x0, x1) x [y0, y1) in grid cells.
struct Roi {
    long x0 = 0;
    long y0 = 0;
    long x1 = 0;
    long y1 = 0;

    long width() const noexcept { return x1 - x0; }
    long height() const noexcept { return y1 - y0; }
    bool contains(long x, long y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }

    friend bool operator==(const Roi&, const Roi&) = default;
};

struct CityParams {
    double width_m = 600.0;
    double height_m = 600.0;
    double block_pitch_m = 60.0;
    double street_width_m = 20.0;
    double building_min_m = 6.0;
    double building_max_m = 40.0;
    double terrain_amplitude_m = 4.0;
    int n_stations = 12;
    double mast_height_m = 25.0;
    double roi_buffer_m = 100.0;

    friend bool operator==(const CityParams&, const CityParams&) = default;
};

class CityScenario {
public:
    CityScenario(HeightGrid terrain, HeightGrid surface, std::vector<BaseStation> stations, Roi roi,
                 double building_threshold = 2.0);

    const HeightGrid& terrain() const noexcept { return terrain_; }
    const HeightGrid& surface() const noexcept { return surface_; }
    const std::vector<BaseStation>& stations() const noexcept { return stations_; }
    const Roi& roi() const noexcept { return roi_; }
    double building_threshold() const noexcept { return building_threshold_; }

    std::size_t cols() const noexcept { return terrain_.cols(); }
    std::size_t rows() const noexcept { return terrain_.rows(); }

    bool is_building(std::size_t x, std::size_t y) const noexcept {
        return surface_.at(x, y) - terrain_.at(x, y) > building_threshold_;
    }

    /// Absolute height of the station's antenna: terrain + mast_height.
    double antenna_height(const BaseStation& s) const;

    /// Generator parameters and seed, when the scenario was synthesized.
    const std::optional<std::pair<CityParams, std::uint64_t>>& provenance() const noexcept { return provenance_; }
    void set_provenance(CityParams p, std::uint64_t seed) { provenance_ = std::make_pair(p, seed); }

    friend bool operator==(const CityScenario& a, const CityScenario& b) {
        return a.terrain_ == b.terrain_ && a.surface_ == b.surface_ && a.stations_ == b.stations_ &&
               a.roi_ == b.roi_ && a.building_threshold_ == b.building_threshold_;
    }

private:
    HeightGrid terrain_;
    HeightGrid surface_;
    std::vector<BaseStation> stations_;
    Roi roi_;
    double building_threshold_;
    std::optional<std::pair<CityParams, std::uint64_t>> provenance_;
};

/// Reads an ESRI ASCII grid. Header keys are case-insensitive; the first
/// data row is the northernmost. Only 1 m cells are accepted.
HeightGrid parse_surface_raster(std::istream& in);
HeightGrid load_surface_raster(const std::string& path);

/// Writes an ESRI ASCII grid using shortest round-trip number formatting.
void write_surface_raster(std::ostream& out, const HeightGrid& grid);
void save_surface_raster(const std::string& path, const HeightGrid& grid);

CityScenario generate_city(const CityParams& params, std::uint64_t seed);

/// Lowest admissible absolute altitude over cell (x, y): 10 m above terrain,
/// and 3 m above the roof on building cells.
double min_safe_altitude(const CityScenario& scenario, long x, long y);

inline constexpr double kTerrainClearance = 10.0;
inline constexpr double kBuildingGuard = 3.0;

nlohmann::json city_params_to_json(const CityParams& p);
CityParams city_params_from_json(const nlohmann::json& j);

/// Scenario descriptor; raster paths are stored as given.
nlohmann::json scenario_descriptor(const CityScenario& scenario, const std::string& terrain_file,
                                   const std::string& surface_file);

/// Loads a scenario descriptor. Raster paths are resolved relative to
/// `base_dir`. A descriptor with "generator" params and a "seed" but no
/// raster files is synthesized.
CityScenario load_scenario(const nlohmann::json& descriptor, const std::string& base_dir);
CityScenario load_scenario_file(const std::string& path);

} // namespace uavcov
