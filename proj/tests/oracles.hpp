#pragma once

// Reference implementations used to cross-check the library. They share no
// code with it beyond its plain data containers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "uavcov/planners.hpp"
#include "uavcov/radio.hpp"
#include "uavcov/terrain.hpp"

namespace oracles {

struct CostModel {
    double threshold = -3.0;
    double norm = 1.5;
    double floor = 0.001;
    bool clamp = true;

    double operator()(double length, double sinr) const {
        const double c = length + (threshold - sinr) / norm;
        return clamp ? std::max(c, floor) : c;
    }
};

inline CostModel from_config(const uavcov::AStarConfig& c) {
    return {c.sinr_threshold_db, c.cost_normalization, c.edge_cost_floor, !c.allow_negative_costs};
}

inline double horizontal(const uavcov::PathProfile& p, std::size_t s) {
    const auto& a = p.track.cells[s];
    const auto& b = p.track.cells[s + 1];
    return (a.x != b.x && a.y != b.y) ? std::sqrt(2.0) : 1.0;
}

inline std::size_t lowest_open(const uavcov::PathProfile& p, std::size_t s) {
    for (std::size_t k = 0; k < p.nz; ++k) {
        if (!p.is_blocked(s, k)) return k;
    }
    return p.nz;
}

/// Textbook Dijkstra over the (step, altitude) lattice with a binary heap.
inline double dijkstra_cost(const uavcov::PathProfile& p, const CostModel& cost) {
    const std::size_t n = p.n_steps(), nz = p.nz;
    std::vector<double> dist(n * nz, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    const std::size_t start = lowest_open(p, 0);
    const std::size_t goal = (n - 1) * nz + lowest_open(p, n - 1);
    dist[start] = 0.0;
    heap.push({0.0, start});
    while (!heap.empty()) {
        const auto [d, id] = heap.top();
        heap.pop();
        if (d > dist[id]) continue;
        if (id == goal) return d;
        const std::size_t s = id / nz, k = id % nz;
        auto relax = [&](std::size_t s2, long k2, double len) {
            if (s2 >= n || k2 < 0 || static_cast<std::size_t>(k2) >= nz) return;
            const auto uk = static_cast<std::size_t>(k2);
            if (p.is_blocked(s2, uk)) return;
            const double nd = d + cost(len, p.sinr(s2, uk));
            if (nd < dist[s2 * nz + uk]) {
                dist[s2 * nz + uk] = nd;
                heap.push({nd, s2 * nz + uk});
            }
        };
        const long lk = static_cast<long>(k);
        relax(s, lk + 1, 1.0);
        relax(s, lk - 1, 1.0);
        if (s + 1 < n) {
            const double h = horizontal(p, s);
            relax(s + 1, lk, h);
            relax(s + 1, lk + 1, std::sqrt(h * h + 1.0));
            relax(s + 1, lk - 1, std::sqrt(h * h + 1.0));
        }
    }
    return std::numeric_limits<double>::infinity();
}

/// One monotone path: per step an entry level, a vertical run, then a move
/// to the next step. Stored as the node sequence.
using NodeSeq = std::vector<std::pair<std::size_t, std::size_t>>;

/// Depth-first enumeration of every simple (hence per-column monotone) path
/// from start to goal. `visit(nodes, cost)` sees each complete path.
/// When `bound` is set, a partial path is dropped once its cost plus
/// `remaining[s]` (a lower bound on the cost still to come from step s)
/// reaches `bound()`.
inline void enumerate_paths(const uavcov::PathProfile& p, const CostModel& cost,
                            const std::function<void(const NodeSeq&, double)>& visit,
                            const std::function<double()>& bound = {}, const std::vector<double>& remaining = {}) {
    const std::size_t n = p.n_steps(), nz = p.nz;
    const std::size_t goal_k = lowest_open(p, n - 1);
    NodeSeq nodes;
    // dir: 0 = free, +1 = rising only, -1 = falling only within the column.
    std::function<void(std::size_t, std::size_t, int, double)> dfs = [&](std::size_t s, std::size_t k, int dir,
                                                                            double g) {
        // A branch is dropped only when it cannot beat the incumbent strictly.
        // The bound is shrunk by a relative 1e-9 so that rounding in the
        // forward sums can never discard a cheaper path.
        if (bound && g + remaining[s] * (1.0 - 1e-9) >= bound()) return;
        nodes.push_back({s, k});
        if (s == n - 1 && k == goal_k) visit(nodes, g);
        // Vertical moves continue the monotone run in this column.
        for (int dk : {+1, -1}) {
            if (dir == -dk) continue;
            const long k2 = static_cast<long>(k) + dk;
            if (k2 < 0 || static_cast<std::size_t>(k2) >= nz) continue;
            const auto uk = static_cast<std::size_t>(k2);
            if (p.is_blocked(s, uk)) continue;
            dfs(s, uk, dk, g + cost(1.0, p.sinr(s, uk)));
        }
        if (s + 1 < n) {
            const double h = horizontal(p, s);
            for (int dk : {0, +1, -1}) {
                const long k2 = static_cast<long>(k) + dk;
                if (k2 < 0 || static_cast<std::size_t>(k2) >= nz) continue;
                const auto uk = static_cast<std::size_t>(k2);
                if (p.is_blocked(s + 1, uk)) continue;
                const double len = dk == 0 ? h : std::sqrt(h * h + 1.0);
                dfs(s + 1, uk, 0, g + cost(len, p.sinr(s + 1, uk)));
            }
        }
        nodes.pop_back();
    };
    dfs(0, lowest_open(p, 0), 0, 0.0);
}

/// Exact minimum over all monotone paths by branch and bound. Requires
/// clamped (non-negative) costs. `upper_bound` may be the cost of any known
/// path; it is returned when no strictly cheaper path exists.
inline double brute_force_cost(const uavcov::PathProfile& p, const CostModel& cost,
                               double upper_bound = std::numeric_limits<double>::infinity()) {
    const std::size_t n = p.n_steps();
    // Every path makes exactly one step-advancing move into each later column,
    // costing at least the cheapest horizontal arrival there.
    std::vector<double> remaining(n, 0.0);
    for (std::size_t s = n - 1; s-- > 0;) {
        double cheapest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < p.nz; ++k) {
            if (!p.is_blocked(s + 1, k)) cheapest = std::min(cheapest, cost(horizontal(p, s), p.sinr(s + 1, k)));
        }
        remaining[s] = remaining[s + 1] + cheapest;
    }
    double best = upper_bound;
    bool found = false;
    enumerate_paths(
        p, cost,
        [&](const NodeSeq&, double g) {
            if (g <= best) {
                best = g;
                found = true;
            }
        },
        [&] { return best; }, remaining);
    return found || std::isfinite(upper_bound) ? best : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Radio

// Independent oracles: natural logs and explicit linear sums.
inline double log10_oracle(double v) { return std::log(v) / std::log(10.0); }

inline double sinr_oracle(double serving_dbm, const std::vector<double>& interferers_dbm, double noise_dbm) {
    double denom_mw = std::exp(noise_dbm / 10.0 * std::log(10.0));
    for (double i : interferers_dbm) denom_mw += std::exp(i / 10.0 * std::log(10.0));
    return serving_dbm - 10.0 * log10_oracle(denom_mw);
}

/// A band whose noise floor is exactly -92 dBm: 1 MHz (60 dB) and NF 22.
inline uavcov::BandConfig quiet_band(double tx_dbm) {
    uavcov::BandConfig b;
    b.name = "test";
    b.carrier_ghz = 1.8;
    b.bandwidth_hz = 1e6;
    b.noise_figure_db = 22.0;
    b.tx_power_dbm = tx_dbm;
    return b;
}

// Dense-sampling LoS oracle: the segment is walked every `step` metres and
// each sample is compared to the surface of the cell that contains it.
struct SampledLos {
    bool los = true;
    double margin = std::numeric_limits<double>::infinity();
};

inline SampledLos sampled_los(const uavcov::CityScenario& sc, const uavcov::Point3& a, const uavcov::Point3& b, double step) {
    const auto cell = [](double v) { return static_cast<long>(std::floor(v + 0.5)); };
    const long ax = cell(a.x), ay = cell(a.y), bx = cell(b.x), by = cell(b.y);
    const double horiz = std::hypot(b.x - a.x, b.y - a.y);
    const auto n = static_cast<std::size_t>(std::ceil(horiz / step));
    SampledLos out;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = n == 0 ? 0.0 : static_cast<double>(i) / static_cast<double>(n);
        const double x = a.x + t * (b.x - a.x), y = a.y + t * (b.y - a.y), z = a.z + t * (b.z - a.z);
        const long cx = cell(x), cy = cell(y);
        if ((cx == ax && cy == ay) || (cx == bx && cy == by)) continue;
        const double s = sc.surface().at(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy));
        out.margin = std::min(out.margin, std::abs(z - s));
        if (z < s) out.los = false;
    }
    return out;
}


} // namespace oracles
