#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavcov/terrain.hpp"

namespace uavcov {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

enum class PathlossModel {
    Uma,     ///< 3GPP-UMa-shaped dual slope, sub-6 GHz
    CloseIn, ///< close-in free-space reference, mmWave
};

struct BandConfig {
    std::string name;
    double carrier_ghz = 1.8;
    double bandwidth_hz = 20e6;
    double tx_power_dbm = 46.0;
    double noise_figure_db = 9.0;
    PathlossModel model = PathlossModel::Uma;
    // Only read by the close-in model.
    double los_exponent = 2.1;
    double nlos_exponent = 3.4;

    void validate() const;
};

/// LTE 1.8 GHz / 20 MHz, NR 3.5 GHz / 100 MHz and NR 28 GHz / 400 MHz.
const std::vector<BandConfig>& builtin_bands();
const BandConfig& builtin_band(const std::string& name);

nlohmann::json band_to_json(const BandConfig& band);
BandConfig band_from_json(const nlohmann::json& j);

/// Deterministic path loss in dB. Throws DomainError for d3d < 1 m.
double path_loss_db(const BandConfig& band, double d3d, bool los);

/// Thermal noise floor over the band, dBm.
double noise_power_dbm(const BandConfig& band);

/// A cell crossed by a segment's ground projection, with the parameter
/// interval [t_in, t_out] (0 at a, 1 at b) spent over it.
struct CrossedCell {
    long x;
    long y;
    double t_in;
    double t_out;
};

/// Supercover traversal of the 2D segment a -> b. Every cell the segment
/// touches is returned, including cells touched only at a corner. The
/// endpoint cells are excluded.
std::vector<CrossedCell> supercover_cells(double ax, double ay, double bx, double by);

/// Lowest altitude at column (x, y) that is in line of sight of `from`.
/// LoS is monotone in the target altitude, so this single threshold answers
/// every voxel in the column. May be -inf when nothing can occlude.
double los_min_altitude(const CityScenario& scenario, const Point3& from, double x, double y);

/// True iff the segment a -> b stays at or above the surface over every cell
/// it crosses (endpoint cells excluded). Throws GeometryError if either
/// endpoint is below its local surface.
bool is_los(const CityScenario& scenario, const Point3& a, const Point3& b);

struct LinkResult {
    double sinr_db = 0.0;
    std::size_t serving_index = 0;
    std::string serving_id;
};

/// Full-load SINR from per-station received powers in dBm. The strongest
/// station serves; ties go to the lexicographically smallest id.
LinkResult sinr_from_powers(std::span<const double> rx_dbm, std::span<const std::string> ids, double noise_dbm);

Point3 antenna_position(const CityScenario& scenario, const BaseStation& station);

/// SINR at a point above the surface with every other station interfering.
LinkResult sinr_at(const CityScenario& scenario, const BandConfig& band, const Point3& p);

/// Per-(ROI column, station) LoS thresholds. Independent of the band, so one
/// table serves every band of a scenario.
class LosTable {
public:
    LosTable(const CityScenario& scenario, unsigned workers = 1);

    double threshold(std::size_t local_x, std::size_t local_y, std::size_t station) const noexcept {
        return thresholds_[(local_x * ny_ + local_y) * n_stations_ + station];
    }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t n_stations() const noexcept { return n_stations_; }

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::size_t n_stations_ = 0;
    std::vector<double> thresholds_;
};

inline constexpr std::uint16_t kUnreachable = 0xFFFF;
inline constexpr double kCoverageCeiling = 120.0;

/// SINR volume over the ROI. Voxel (i, j, k) is centred at absolute
/// (origin_x + i, origin_y + j, z0 + k). Storage order: x slowest, z fastest.
struct CoverageVolume {
    std::string band_name;
    long origin_x = 0;
    long origin_y = 0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    long z0 = 0;
    std::size_t nz = 0;
    std::uint32_t n_stations = 0;
    std::vector<float> sinr_db;
    std::vector<std::uint16_t> serving;

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept { return (i * ny + j) * nz + k; }
    bool reachable(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return serving[index(i, j, k)] != kUnreachable;
    }
    float sinr(std::size_t i, std::size_t j, std::size_t k) const noexcept { return sinr_db[index(i, j, k)]; }
    double altitude(std::size_t k) const noexcept { return static_cast<double>(z0) + static_cast<double>(k); }
    bool contains_cell(long x, long y) const noexcept {
        return x >= origin_x && y >= origin_y && x < origin_x + static_cast<long>(nx) &&
               y < origin_y + static_cast<long>(ny);
    }
};

/// Bitwise equality; unreachable voxels hold NaN so float comparison won't do.
bool identical(const CoverageVolume& a, const CoverageVolume& b);

/// Evaluates the SINR at every voxel centre strictly above the surface in
/// the ROI, from the lowest terrain level to 120 m above the highest roof.
CoverageVolume compute_coverage_volume(const CityScenario& scenario, const BandConfig& band, unsigned workers = 1,
                                       const LosTable* los = nullptr);

void write_volume(std::ostream& out, const CoverageVolume& volume);
CoverageVolume read_volume(std::istream& in);
void save_volume(const std::string& path, const CoverageVolume& volume);
CoverageVolume load_volume(const std::string& path);

} // namespace uavcov
