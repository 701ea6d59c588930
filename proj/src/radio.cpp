#include "uavcov/radio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <optional>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "uavcov/error.hpp"
#include "uavcov/parallel.hpp"

namespace uavcov {

// ---------------------------------------------------------------------------
// Bands

void BandConfig::validate() const {
    if (!(carrier_ghz > 0.0)) throw ConfigError("band '" + name + "': carrier_ghz must be > 0");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("band '" + name + "': bandwidth_hz must be > 0");
    if (model == PathlossModel::CloseIn && !(nlos_exponent >= los_exponent)) {
        throw ConfigError("band '" + name + "': nlos_exponent must be >= los_exponent");
    }
}

const std::vector<BandConfig>& builtin_bands() {
    static const std::vector<BandConfig> bands = {
        {"lte_1800", 1.8, 20e6, 46.0, 9.0, PathlossModel::Uma, 2.2, 3.908},
        {"nr_3500", 3.5, 100e6, 46.0, 9.0, PathlossModel::Uma, 2.2, 3.908},
        {"nr_28000", 28.0, 400e6, 43.0, 9.0, PathlossModel::CloseIn, 2.1, 3.4},
    };
    return bands;
}

const BandConfig& builtin_band(const std::string& name) {
    for (const auto& b : builtin_bands()) {
        if (b.name == name) return b;
    }
    std::string known;
    for (const auto& b : builtin_bands()) known += (known.empty() ? "" : ", ") + b.name;
    throw ConfigError("unknown band '" + name + "' (known bands: " + known + ")");
}

nlohmann::json band_to_json(const BandConfig& band) {
    nlohmann::json pl = {{"model", band.model == PathlossModel::Uma ? "uma" : "ci"}};
    if (band.model == PathlossModel::CloseIn) {
        pl["los_exponent"] = band.los_exponent;
        pl["nlos_exponent"] = band.nlos_exponent;
    }
    return {{"name", band.name},
            {"carrier_ghz", band.carrier_ghz},
            {"bandwidth_hz", band.bandwidth_hz},
            {"tx_power_dbm", band.tx_power_dbm},
            {"noise_figure_db", band.noise_figure_db},
            {"pathloss", pl}};
}

BandConfig band_from_json(const nlohmann::json& j) {
    try {
        if (j.is_string()) return builtin_band(j.get<std::string>());
        BandConfig b;
        b.name = j.at("name").get<std::string>();
        b.carrier_ghz = j.at("carrier_ghz").get<double>();
        b.bandwidth_hz = j.at("bandwidth_hz").get<double>();
        b.tx_power_dbm = j.value("tx_power_dbm", 46.0);
        b.noise_figure_db = j.value("noise_figure_db", 9.0);
        const auto& pl = j.at("pathloss");
        const auto model = pl.at("model").get<std::string>();
        if (model == "uma") {
            b.model = PathlossModel::Uma;
        } else if (model == "ci") {
            b.model = PathlossModel::CloseIn;
            b.los_exponent = pl.value("los_exponent", 2.1);
            b.nlos_exponent = pl.value("nlos_exponent", 3.4);
        } else {
            throw ConfigError("band '" + b.name + "': unknown pathloss model '" + model + "'");
        }
        b.validate();
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid band config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Link budget

namespace {

// Path loss as intercept + slope * log10(d), NLoS = max(LoS line, NLoS line).
struct LogDistanceModel {
    double los_intercept, los_slope;
    double nlos_intercept, nlos_slope;

    double loss(double log10_d, bool los) const noexcept {
        const double l = los_intercept + los_slope * log10_d;
        if (los) return l;
        return std::max(l, nlos_intercept + nlos_slope * log10_d);
    }
};

LogDistanceModel model_for(const BandConfig& band) {
    const double fterm = 20.0 * std::log10(band.carrier_ghz);
    if (band.model == PathlossModel::Uma) return {28.0 + fterm, 22.0, 13.54 + fterm, 39.08};
    return {32.4 + fterm, 10.0 * band.los_exponent, 32.4 + fterm, 10.0 * band.nlos_exponent};
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

} // namespace

double path_loss_db(const BandConfig& band, double d3d, bool los) {
    if (!(d3d >= 1.0)) throw DomainError("path loss needs d3d >= 1 m");
    return model_for(band).loss(std::log10(d3d), los);
}

double noise_power_dbm(const BandConfig& band) {
    return -174.0 + 10.0 * std::log10(band.bandwidth_hz) + band.noise_figure_db;
}

LinkResult sinr_from_powers(std::span<const double> rx_dbm, std::span<const std::string> ids, double noise_dbm) {
    if (rx_dbm.empty() || rx_dbm.size() != ids.size()) throw ScenarioError("need one received power per station");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rx_dbm.size(); ++i) {
        if (rx_dbm[i] > rx_dbm[best] || (rx_dbm[i] == rx_dbm[best] && ids[i] < ids[best])) best = i;
    }
    double interference = 0.0;
    for (std::size_t i = 0; i < rx_dbm.size(); ++i) {
        if (i != best) interference += dbm_to_mw(rx_dbm[i]);
    }
    const double sinr = rx_dbm[best] - 10.0 * std::log10(interference + dbm_to_mw(noise_dbm));
    return {sinr, best, std::string(ids[best])};
}

// ---------------------------------------------------------------------------
// Line of sight

namespace {

long cell_of(double v) { return static_cast<long>(std::floor(v + 0.5)); }

// Amanatides-Woo over unit cells centred on integers, with corner crossings
// reported as zero-length visits to both side cells.
template <typename Fn>
void traverse(double ax, double ay, double bx, double by, Fn&& fn) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double eps = 1e-12;
    long cx = cell_of(ax), cy = cell_of(ay);
    const long ex = cell_of(bx), ey = cell_of(by);
    const double dx = bx - ax, dy = by - ay;
    const long sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const long sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    double tmax_x = sx ? ((static_cast<double>(cx) + 0.5 * static_cast<double>(sx)) - ax) / dx : inf;
    double tmax_y = sy ? ((static_cast<double>(cy) + 0.5 * static_cast<double>(sy)) - ay) / dy : inf;
    const double tdelta_x = sx ? 1.0 / std::abs(dx) : inf;
    const double tdelta_y = sy ? 1.0 / std::abs(dy) : inf;

    bool first = true;
    double t_in = 0.0;
    while (cx != ex || cy != ey) {
        bool step_x, step_y;
        if (cx == ex) {
            step_x = false, step_y = true;
        } else if (cy == ey) {
            step_x = true, step_y = false;
        } else if (std::abs(tmax_x - tmax_y) <= eps) {
            step_x = step_y = true;
        } else {
            step_x = tmax_x < tmax_y;
            step_y = !step_x;
        }
        const double t = std::clamp(step_x ? tmax_x : tmax_y, 0.0, 1.0);
        if (!first) fn(CrossedCell{cx, cy, t_in, t});
        first = false;
        if (step_x && step_y) {
            fn(CrossedCell{cx + sx, cy, t, t});
            fn(CrossedCell{cx, cy + sy, t, t});
            cx += sx, cy += sy;
            tmax_x += tdelta_x, tmax_y += tdelta_y;
        } else if (step_x) {
            cx += sx;
            tmax_x += tdelta_x;
        } else {
            cy += sy;
            tmax_y += tdelta_y;
        }
        t_in = t;
        if (cx == ex && cy == ey) break;
    }
}

double surface_at(const CityScenario& scenario, long x, long y) {
    return scenario.surface().at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
}

void require_above_surface(const CityScenario& scenario, const Point3& p, const char* which) {
    const long x = cell_of(p.x), y = cell_of(p.y);
    if (!scenario.surface().contains(x, y)) throw BoundsError(std::string(which) + " point outside the grid");
    if (p.z < surface_at(scenario, x, y)) throw GeometryError(std::string(which) + " point is below the surface");
}

} // namespace

std::vector<CrossedCell> supercover_cells(double ax, double ay, double bx, double by) {
    std::vector<CrossedCell> out;
    traverse(ax, ay, bx, by, [&](const CrossedCell& c) { out.push_back(c); });
    return out;
}

double los_min_altitude(const CityScenario& scenario, const Point3& from, double x, double y) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double threshold = -inf;
    bool blocked = false;
    const auto& surface = scenario.surface();
    traverse(from.x, from.y, x, y, [&](const CrossedCell& c) {
        if (blocked || !surface.contains(c.x, c.y)) return;
        const double s = surface_at(scenario, c.x, c.y);
        // height(t) = from.z + t (z - from.z) >= s  <=>  z >= from.z + (s - from.z) / t
        for (const double t : {c.t_in, c.t_out}) {
            if (t > 0.0) {
                threshold = std::max(threshold, from.z + (s - from.z) / t);
            } else if (from.z < s) {
                blocked = true;
            }
        }
    });
    return blocked ? inf : threshold;
}

bool is_los(const CityScenario& scenario, const Point3& a, const Point3& b) {
    require_above_surface(scenario, a, "start");
    require_above_surface(scenario, b, "end");
    return b.z >= los_min_altitude(scenario, a, b.x, b.y);
}

Point3 antenna_position(const CityScenario& scenario, const BaseStation& station) {
    return {station.x, station.y, scenario.antenna_height(station)};
}

LinkResult sinr_at(const CityScenario& scenario, const BandConfig& band, const Point3& p) {
    const auto& stations = scenario.stations();
    if (stations.empty()) throw ScenarioError("scenario has no base stations");
    require_above_surface(scenario, p, "query");
    const auto model = model_for(band);
    std::vector<double> rx(stations.size());
    std::vector<std::string> ids(stations.size());
    for (std::size_t i = 0; i < stations.size(); ++i) {
        const Point3 a = antenna_position(scenario, stations[i]);
        const double d = std::max(1.0, std::hypot(p.x - a.x, p.y - a.y, p.z - a.z));
        const bool los = p.z >= los_min_altitude(scenario, a, p.x, p.y);
        rx[i] = band.tx_power_dbm - model.loss(std::log10(d), los);
        ids[i] = stations[i].id;
    }
    return sinr_from_powers(rx, ids, noise_power_dbm(band));
}

// ---------------------------------------------------------------------------
// Coverage volume

LosTable::LosTable(const CityScenario& scenario, unsigned workers)
    : nx_(static_cast<std::size_t>(scenario.roi().width())),
      ny_(static_cast<std::size_t>(scenario.roi().height())),
      n_stations_(scenario.stations().size()),
      thresholds_(nx_ * ny_ * n_stations_) {
    std::vector<Point3> antennas;
    for (const auto& s : scenario.stations()) antennas.push_back(antenna_position(scenario, s));
    const auto& roi = scenario.roi();
    parallel_for(nx_, workers, [&](std::size_t i) {
        for (std::size_t j = 0; j < ny_; ++j) {
            const double x = static_cast<double>(roi.x0 + static_cast<long>(i));
            const double y = static_cast<double>(roi.y0 + static_cast<long>(j));
            for (std::size_t s = 0; s < n_stations_; ++s) {
                thresholds_[(i * ny_ + j) * n_stations_ + s] = los_min_altitude(scenario, antennas[s], x, y);
            }
        }
    });
}

CoverageVolume compute_coverage_volume(const CityScenario& scenario, const BandConfig& band, unsigned workers,
                                       const LosTable* los) {
    band.validate();
    const auto& stations = scenario.stations();
    if (stations.empty()) throw ScenarioError("scenario has no base stations");
    if (stations.size() >= kUnreachable) throw ScenarioError("too many stations for 16-bit serving ids");

    std::optional<LosTable> owned;
    if (!los) los = &owned.emplace(scenario, workers);

    const auto& roi = scenario.roi();
    CoverageVolume vol;
    vol.band_name = band.name;
    vol.origin_x = roi.x0;
    vol.origin_y = roi.y0;
    vol.nx = static_cast<std::size_t>(roi.width());
    vol.ny = static_cast<std::size_t>(roi.height());
    vol.n_stations = static_cast<std::uint32_t>(stations.size());

    double min_terrain = std::numeric_limits<double>::infinity();
    double max_surface = -std::numeric_limits<double>::infinity();
    for (long y = roi.y0; y < roi.y1; ++y) {
        for (long x = roi.x0; x < roi.x1; ++x) {
            min_terrain = std::min(min_terrain, scenario.terrain().at(x, y));
            max_surface = std::max(max_surface, scenario.surface().at(x, y));
        }
    }
    vol.z0 = static_cast<long>(std::floor(min_terrain));
    const long top = static_cast<long>(std::ceil(max_surface + kCoverageCeiling));
    vol.nz = static_cast<std::size_t>(top - vol.z0 + 1);
    const std::size_t total = vol.nx * vol.ny * vol.nz;
    vol.sinr_db.assign(total, std::numeric_limits<float>::quiet_NaN());
    vol.serving.assign(total, kUnreachable);

    const auto model = model_for(band);
    const double noise_mw = dbm_to_mw(noise_power_dbm(band));
    std::vector<Point3> antennas;
    for (const auto& s : stations) antennas.push_back(antenna_position(scenario, s));
    // Visiting stations in id order with a strict comparison gives the
    // smallest id on ties.
    std::vector<std::size_t> order(stations.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return stations[a].id < stations[b].id; });

    parallel_for(vol.nx, workers, [&](std::size_t i) {
        const std::size_t n = stations.size();
        std::vector<double> horiz2(n), rx_mw(n);
        for (std::size_t j = 0; j < vol.ny; ++j) {
            const double x = static_cast<double>(roi.x0 + static_cast<long>(i));
            const double y = static_cast<double>(roi.y0 + static_cast<long>(j));
            const double surf = scenario.surface().at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
            for (std::size_t s = 0; s < n; ++s) {
                horiz2[s] = (x - antennas[s].x) * (x - antennas[s].x) + (y - antennas[s].y) * (y - antennas[s].y);
            }
            for (std::size_t k = 0; k < vol.nz; ++k) {
                const double z = vol.altitude(k);
                if (z <= surf) continue;
                for (std::size_t s = 0; s < n; ++s) {
                    const double dz = z - antennas[s].z;
                    const double d = std::max(1.0, std::sqrt(horiz2[s] + dz * dz));
                    const bool in_sight = z >= los->threshold(i, j, s);
                    rx_mw[s] = dbm_to_mw(band.tx_power_dbm - model.loss(std::log10(d), in_sight));
                }
                std::size_t best = order[0];
                for (std::size_t s : order) {
                    if (rx_mw[s] > rx_mw[best]) best = s;
                }
                double interference = 0.0;
                for (std::size_t s = 0; s < n; ++s) {
                    if (s != best) interference += rx_mw[s];
                }
                const std::size_t idx = vol.index(i, j, k);
                vol.sinr_db[idx] = static_cast<float>(10.0 * std::log10(rx_mw[best] / (interference + noise_mw)));
                vol.serving[idx] = static_cast<std::uint16_t>(best);
            }
        }
    });
    return vol;
}

// ---------------------------------------------------------------------------
// Volume cache file

namespace {

constexpr std::array<char, 8> kMagic = {'U', 'A', 'V', 'C', 'V', 'O', 'L', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw IoError("truncated volume file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

bool identical(const CoverageVolume& a, const CoverageVolume& b) {
    return a.band_name == b.band_name && a.origin_x == b.origin_x && a.origin_y == b.origin_y && a.nx == b.nx &&
           a.ny == b.ny && a.z0 == b.z0 && a.nz == b.nz && a.n_stations == b.n_stations &&
           a.sinr_db.size() == b.sinr_db.size() && a.serving == b.serving &&
           std::memcmp(a.sinr_db.data(), b.sinr_db.data(), a.sinr_db.size() * sizeof(float)) == 0;
}

void write_volume(std::ostream& out, const CoverageVolume& v) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.nx));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.ny));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.nz));
    put_le<std::int32_t>(out, static_cast<std::int32_t>(v.z0));
    put_le<std::int32_t>(out, static_cast<std::int32_t>(v.origin_x));
    put_le<std::int32_t>(out, static_cast<std::int32_t>(v.origin_y));
    put_le<std::uint32_t>(out, v.n_stations);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.band_name.size()));
    out.write(v.band_name.data(), static_cast<std::streamsize>(v.band_name.size()));
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(v.sinr_db.data()),
                  static_cast<std::streamsize>(v.sinr_db.size() * sizeof(float)));
        out.write(reinterpret_cast<const char*>(v.serving.data()),
                  static_cast<std::streamsize>(v.serving.size() * sizeof(std::uint16_t)));
    } else {
        for (float f : v.sinr_db) put_le(out, f);
        for (auto s : v.serving) put_le(out, s);
    }
}

CoverageVolume read_volume(std::istream& in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("not a coverage volume file");
    CoverageVolume v;
    v.nx = get_le<std::uint32_t>(in);
    v.ny = get_le<std::uint32_t>(in);
    v.nz = get_le<std::uint32_t>(in);
    v.z0 = get_le<std::int32_t>(in);
    v.origin_x = get_le<std::int32_t>(in);
    v.origin_y = get_le<std::int32_t>(in);
    v.n_stations = get_le<std::uint32_t>(in);
    const auto name_len = get_le<std::uint32_t>(in);
    if (name_len > 4096) throw IoError("corrupt volume header");
    v.band_name.resize(name_len);
    if (!in.read(v.band_name.data(), name_len)) throw IoError("truncated volume file");
    const std::size_t total = v.nx * v.ny * v.nz;
    v.sinr_db.resize(total);
    v.serving.resize(total);
    if constexpr (std::endian::native == std::endian::little) {
        if (!in.read(reinterpret_cast<char*>(v.sinr_db.data()), static_cast<std::streamsize>(total * sizeof(float))) ||
            !in.read(reinterpret_cast<char*>(v.serving.data()),
                     static_cast<std::streamsize>(total * sizeof(std::uint16_t)))) {
            throw IoError("truncated volume file");
        }
    } else {
        for (auto& f : v.sinr_db) f = get_le<float>(in);
        for (auto& s : v.serving) s = get_le<std::uint16_t>(in);
    }
    return v;
}

void save_volume(const std::string& path, const CoverageVolume& volume) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write volume '" + path + "'");
    write_volume(out, volume);
    if (!out) throw IoError("write failed for '" + path + "'");
}

CoverageVolume load_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open volume '" + path + "'");
    return read_volume(in);
}

} // namespace uavcov
