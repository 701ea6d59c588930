#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "uavcov/profile.hpp"
#include "uavcov/radio.hpp"
#include "uavcov/rng.hpp"
#include "uavcov/terrain.hpp"

namespace fixtures {

inline uavcov::HeightGrid flat_grid(std::size_t cols, std::size_t rows, double height = 0.0) {
    return uavcov::HeightGrid(rows, cols, height);
}

/// Raises cells [x0, x1) x [y0, y1) to `height` above the grid's current value.
inline void add_block(uavcov::HeightGrid& g, std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1,
                      double height) {
    for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) g.set(x, y, g.at(x, y) + height);
    }
}

inline uavcov::CityScenario scenario(uavcov::HeightGrid terrain, uavcov::HeightGrid surface,
                                     std::vector<uavcov::BaseStation> stations = {}) {
    const uavcov::Roi roi{0, 0, static_cast<long>(terrain.cols()), static_cast<long>(terrain.rows())};
    return uavcov::CityScenario(std::move(terrain), std::move(surface), std::move(stations), roi);
}

inline uavcov::CityScenario flat_scenario(std::size_t cols, std::size_t rows,
                                          std::vector<uavcov::BaseStation> stations = {}) {
    return scenario(flat_grid(cols, rows), flat_grid(cols, rows), std::move(stations));
}

/// Small, fast synthetic city used by several suites.
inline uavcov::CityParams small_city() {
    uavcov::CityParams p;
    p.width_m = 160;
    p.height_m = 160;
    p.block_pitch_m = 40;
    p.street_width_m = 12;
    p.building_min_m = 6;
    p.building_max_m = 30;
    p.terrain_amplitude_m = 3;
    p.n_stations = 4;
    p.roi_buffer_m = 30;
    return p;
}

/// Hand-made volume over the whole scenario with z0 = 0. `value(x, y, alt)`
/// gives the SINR of voxels above the surface; NaN marks them unreachable.
inline uavcov::CoverageVolume field_volume(const uavcov::CityScenario& sc, long z_top,
                                           const std::function<float(std::size_t, std::size_t, double)>& value) {
    uavcov::CoverageVolume v;
    v.band_name = "field";
    v.nx = sc.cols();
    v.ny = sc.rows();
    v.z0 = 0;
    v.nz = static_cast<std::size_t>(z_top + 1);
    v.n_stations = 1;
    v.sinr_db.assign(v.nx * v.ny * v.nz, std::nanf(""));
    v.serving.assign(v.nx * v.ny * v.nz, uavcov::kUnreachable);
    for (std::size_t i = 0; i < v.nx; ++i) {
        for (std::size_t j = 0; j < v.ny; ++j) {
            for (std::size_t k = 0; k < v.nz; ++k) {
                if (v.altitude(k) <= sc.surface().at(i, j)) continue;
                const float x = value(i, j, v.altitude(k));
                if (std::isnan(x)) continue;
                v.sinr_db[v.index(i, j, k)] = x;
                v.serving[v.index(i, j, k)] = 0;
            }
        }
    }
    return v;
}

inline uavcov::CoverageVolume constant_volume(const uavcov::CityScenario& sc, float value, long z_top) {
    return field_volume(sc, z_top, [=](std::size_t, std::size_t, double) { return value; });
}

/// Track of `n` cells; `diagonal[s]` makes the move from s to s + 1 diagonal.
inline uavcov::GroundTrack track(std::size_t n, const std::vector<bool>& diagonal = {}) {
    std::vector<uavcov::Cell> cells{{0, 0}};
    for (std::size_t s = 1; s < n; ++s) {
        const bool diag = s - 1 < diagonal.size() && diagonal[s - 1];
        cells.push_back({cells.back().x + 1, cells.back().y + (diag ? 1 : 0)});
    }
    return uavcov::make_track(std::move(cells));
}

/// Synthetic profile with altitude index k at absolute altitude z0 + k.
inline uavcov::PathProfile profile(uavcov::GroundTrack tr, std::size_t nz,
                                   const std::function<double(std::size_t, std::size_t)>& sinr,
                                   const std::function<bool(std::size_t, std::size_t)>& blocked, long z0 = 0) {
    uavcov::PathProfile p;
    p.track = std::move(tr);
    p.z0 = z0;
    p.nz = nz;
    const std::size_t n = p.track.size();
    p.sinr_db.resize(n * nz);
    p.blocked.resize(n * nz);
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t lowest = nz;
        for (std::size_t k = 0; k < nz; ++k) {
            p.sinr_db[p.index(s, k)] = static_cast<float>(sinr(s, k));
            p.blocked[p.index(s, k)] = blocked(s, k) ? 1 : 0;
            if (!blocked(s, k) && lowest == nz) lowest = k;
        }
        p.terrain_m.push_back(static_cast<double>(z0));
        p.surface_m.push_back(static_cast<double>(z0));
        p.min_alt_m.push_back(p.altitude(lowest == nz ? nz - 1 : lowest));
    }
    return p;
}

/// Random profile: SINR uniform in [-12, 12] dB quantized to 0.25 dB, a
/// ground obstacle band that leaves every column open, random diagonals.
inline uavcov::PathProfile random_profile(uavcov::Rng& rng, std::size_t n, std::size_t nz) {
    std::vector<bool> diag(n);
    for (std::size_t s = 0; s < n; ++s) diag[s] = rng.uniform() < 0.3;
    std::vector<std::size_t> floor(n);
    for (std::size_t s = 0; s < n; ++s) floor[s] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(nz / 2)));
    std::vector<double> values(n * nz);
    for (auto& v : values) v = 0.25 * std::round(rng.uniform(-12.0, 12.0) * 4.0);
    return profile(
        track(n, diag), nz, [&](std::size_t s, std::size_t k) { return values[s * nz + k]; },
        [&](std::size_t s, std::size_t k) { return k < floor[s]; });
}

} // namespace fixtures
