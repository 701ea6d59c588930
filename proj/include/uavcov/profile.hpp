#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "uavcov/radio.hpp"
#include "uavcov/terrain.hpp"

namespace uavcov {

struct Cell {
    long x = 0;
    long y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
};

/// 8-connected ground track with cumulative horizontal distance per cell.
struct GroundTrack {
    std::vector<Cell> cells;
    std::vector<double> step_positions;

    std::size_t size() const noexcept { return cells.size(); }
    double length() const noexcept { return step_positions.empty() ? 0.0 : step_positions.back(); }
    /// Horizontal distance from step s to step s + 1: 1 or sqrt(2).
    double increment(std::size_t s) const noexcept {
        const bool diagonal = cells[s].x != cells[s + 1].x && cells[s].y != cells[s + 1].y;
        return diagonal ? std::numbers::sqrt2 : 1.0;
    }
};

/// Bresenham line from start to goal, both endpoints included.
GroundTrack rasterize_track(Cell start, Cell goal);

/// Builds a track from explicit cells; consecutive cells must be 8-adjacent.
GroundTrack make_track(std::vector<Cell> cells);

/// Vertical slice of the coverage volume along a ground track. Altitude
/// index k is the absolute altitude z0 + k.
struct PathProfile {
    GroundTrack track;
    long z0 = 0;
    std::size_t nz = 0;
    std::vector<float> sinr_db;        // step-major, n_steps x nz
    std::vector<std::uint8_t> blocked; // same layout
    std::vector<double> terrain_m;
    std::vector<double> surface_m;
    std::vector<double> min_alt_m;
    std::size_t nodata_steps = 0;

    std::size_t n_steps() const noexcept { return track.size(); }
    std::size_t index(std::size_t s, std::size_t k) const noexcept { return s * nz + k; }
    float sinr(std::size_t s, std::size_t k) const noexcept { return sinr_db[index(s, k)]; }
    bool is_blocked(std::size_t s, std::size_t k) const noexcept { return blocked[index(s, k)] != 0; }
    double altitude(std::size_t k) const noexcept { return static_cast<double>(z0) + static_cast<double>(k); }

    /// Lowest unblocked altitude index at step s (checked by validate()).
    std::size_t lowest_open(std::size_t s) const;
    /// Smallest altitude index whose altitude is >= alt, clamped to [0, nz).
    std::size_t index_at_or_above(double alt) const noexcept;

    /// Checks shapes and that every step has open airspace.
    void validate() const;
};

/// Copies SINR columns out of `volume` along `track`. Cells below the
/// minimum safe altitude or unreachable in the volume are blocked.
PathProfile extract_profile(const CoverageVolume& volume, const CityScenario& scenario, const GroundTrack& track);

/// Debug CSV: step, cum_distance_m, terrain_m, surface_m, min_alt_m, then one
/// column per altitude holding the SINR or "B" when blocked.
void write_profile_csv(std::ostream& out, const PathProfile& profile);

} // namespace uavcov
