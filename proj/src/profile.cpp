#include "uavcov/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "uavcov/error.hpp"
#include "uavcov/format.hpp"

namespace uavcov {

GroundTrack make_track(std::vector<Cell> cells) {
    GroundTrack track;
    track.step_positions.reserve(cells.size());
    double pos = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            const long dx = std::labs(cells[i].x - cells[i - 1].x);
            const long dy = std::labs(cells[i].y - cells[i - 1].y);
            if (dx > 1 || dy > 1 || dx + dy == 0) throw GeometryError("track cells must be 8-adjacent and distinct");
            pos += (dx + dy == 2) ? std::numbers::sqrt2 : 1.0;
        }
        track.step_positions.push_back(pos);
    }
    track.cells = std::move(cells);
    return track;
}

GroundTrack rasterize_track(Cell start, Cell goal) {
    if (start == goal) throw DegenerateTrackError("start and goal are the same cell");
    std::vector<Cell> cells;
    const long dx = std::labs(goal.x - start.x);
    const long dy = -std::labs(goal.y - start.y);
    const long sx = start.x < goal.x ? 1 : -1;
    const long sy = start.y < goal.y ? 1 : -1;
    long err = dx + dy;
    Cell c = start;
    for (;;) {
        cells.push_back(c);
        if (c == goal) break;
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            c.x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            c.y += sy;
        }
    }
    return make_track(std::move(cells));
}

std::size_t PathProfile::lowest_open(std::size_t s) const {
    for (std::size_t k = 0; k < nz; ++k) {
        if (!is_blocked(s, k)) return k;
    }
    throw NoAirspaceError(s, "every altitude is blocked");
}

std::size_t PathProfile::index_at_or_above(double alt) const noexcept {
    const double k = std::ceil(alt - static_cast<double>(z0));
    if (k <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(k), nz - 1);
}

void PathProfile::validate() const {
    const std::size_t n = n_steps();
    if (n < 2) throw GeometryError("profile needs at least two steps");
    if (track.step_positions.size() != n || sinr_db.size() != n * nz || blocked.size() != n * nz ||
        terrain_m.size() != n || surface_m.size() != n || min_alt_m.size() != n) {
        throw DimensionError("profile arrays disagree with n_steps x nz");
    }
    for (std::size_t s = 0; s < n; ++s) (void)lowest_open(s);
}

PathProfile extract_profile(const CoverageVolume& volume, const CityScenario& scenario, const GroundTrack& track) {
    if (track.size() < 2) throw GeometryError("profile needs at least two steps");
    PathProfile p;
    p.track = track;
    const std::size_t n = track.size();
    p.terrain_m.resize(n);
    p.surface_m.resize(n);
    p.min_alt_m.resize(n);
    double lowest_min_alt = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < n; ++s) {
        const Cell c = track.cells[s];
        if (!volume.contains_cell(c.x, c.y)) {
            throw BoundsError("track cell (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                              ") lies outside the coverage volume");
        }
        const auto ux = static_cast<std::size_t>(c.x);
        const auto uy = static_cast<std::size_t>(c.y);
        p.terrain_m[s] = scenario.terrain().at(ux, uy);
        p.surface_m[s] = scenario.surface().at(ux, uy);
        p.min_alt_m[s] = min_safe_altitude(scenario, c.x, c.y);
        if (scenario.terrain().is_nodata(ux, uy) || scenario.surface().is_nodata(ux, uy)) ++p.nodata_steps;
        lowest_min_alt = std::min(lowest_min_alt, p.min_alt_m[s]);
    }

    const long top = volume.z0 + static_cast<long>(volume.nz);
    p.z0 = std::clamp(static_cast<long>(std::floor(lowest_min_alt)) - 1, volume.z0, top - 1);
    p.nz = static_cast<std::size_t>(top - p.z0);
    const auto k_offset = static_cast<std::size_t>(p.z0 - volume.z0);
    p.sinr_db.resize(n * p.nz);
    p.blocked.resize(n * p.nz);
    for (std::size_t s = 0; s < n; ++s) {
        const auto i = static_cast<std::size_t>(track.cells[s].x - volume.origin_x);
        const auto j = static_cast<std::size_t>(track.cells[s].y - volume.origin_y);
        bool open = false;
        for (std::size_t k = 0; k < p.nz; ++k) {
            const std::size_t vk = k + k_offset;
            const bool blocked = p.altitude(k) < p.min_alt_m[s] || !volume.reachable(i, j, vk);
            p.blocked[p.index(s, k)] = blocked ? 1 : 0;
            p.sinr_db[p.index(s, k)] = volume.sinr(i, j, vk);
            open = open || !blocked;
        }
        if (!open) throw NoAirspaceError(s, "no admissible altitude inside the coverage volume");
    }
    return p;
}

void write_profile_csv(std::ostream& out, const PathProfile& p) {
    out << "step,cum_distance_m,terrain_m,surface_m,min_alt_m";
    for (std::size_t k = 0; k < p.nz; ++k) out << ",z" << p.z0 + static_cast<long>(k);
    out << '\n';
    for (std::size_t s = 0; s < p.n_steps(); ++s) {
        out << s << ',' << to_shortest(p.track.step_positions[s]) << ',' << to_shortest(p.terrain_m[s]) << ','
            << to_shortest(p.surface_m[s]) << ',' << to_shortest(p.min_alt_m[s]);
        for (std::size_t k = 0; k < p.nz; ++k) {
            out << ',';
            if (p.is_blocked(s, k)) out << 'B';
            else out << to_shortest(p.sinr(s, k));
        }
        out << '\n';
    }
}

} // namespace uavcov
