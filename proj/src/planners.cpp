#include "uavcov/planners.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <queue>

#include "uavcov/error.hpp"
#include "uavcov/format.hpp"

namespace uavcov {

const char* move_name(Move m) noexcept {
    switch (m) {
    case Move::H: return "H";
    case Move::VUp: return "V+";
    case Move::VDown: return "V-";
    case Move::DUp: return "D+";
    case Move::DDown: return "D-";
    }
    return "?";
}

void AStarConfig::validate() const {
    if (!(cost_normalization > 0.0)) throw ConfigError("cost_normalization must be > 0");
    if (!(edge_cost_floor >= 0.0)) throw ConfigError("edge_cost_floor must be >= 0");
}

double move_length(const GroundTrack& track, std::size_t from_step, Move m) {
    switch (m) {
    case Move::VUp:
    case Move::VDown: return 1.0;
    case Move::H: return track.increment(from_step);
    case Move::DUp:
    case Move::DDown: {
        const double h = track.increment(from_step);
        return std::sqrt(h * h + 1.0);
    }
    }
    return 0.0;
}

namespace {

bool classify(const PathNode& a, const PathNode& b, Move& out) {
    const long ds = static_cast<long>(b.step) - static_cast<long>(a.step);
    const long dk = static_cast<long>(b.level) - static_cast<long>(a.level);
    if (ds == 1 && dk == 0) out = Move::H;
    else if (ds == 0 && dk == 1) out = Move::VUp;
    else if (ds == 0 && dk == -1) out = Move::VDown;
    else if (ds == 1 && dk == 1) out = Move::DUp;
    else if (ds == 1 && dk == -1) out = Move::DDown;
    else return false;
    return true;
}

PathNode node_at(const PathProfile& p, std::size_t s, std::size_t k) { return {s, k, p.altitude(k)}; }

// Appends the canonical transition from (s, a) to (s + 1, b): climbs happen
// at step s and finish with a diagonal, descents start with a diagonal and
// finish vertically at step s + 1.
void connect(const PathProfile& p, std::vector<PathNode>& nodes, std::size_t s, std::size_t a, std::size_t b) {
    if (b == a) {
        nodes.push_back(node_at(p, s + 1, b));
    } else if (b > a) {
        for (std::size_t k = a + 1; k < b; ++k) nodes.push_back(node_at(p, s, k));
        nodes.push_back(node_at(p, s + 1, b));
    } else {
        for (std::size_t k = a - 1;; --k) {
            nodes.push_back(node_at(p, s + 1, k));
            if (k == b) break;
        }
    }
}

FlightPath follow_targets(const PathProfile& p, const std::vector<std::size_t>& targets) {
    std::vector<PathNode> nodes;
    nodes.push_back(node_at(p, 0, targets[0]));
    for (std::size_t s = 0; s + 1 < targets.size(); ++s) connect(p, nodes, s, targets[s], targets[s + 1]);
    return make_path(p, std::move(nodes));
}

} // namespace

FlightPath make_path(const PathProfile& profile, std::vector<PathNode> nodes) {
    FlightPath path;
    if (nodes.empty()) return path;
    for (const auto& n : nodes) {
        if (n.step >= profile.n_steps() || n.level >= profile.nz) throw GeometryError("path node outside the profile");
        if (profile.is_blocked(n.step, n.level)) {
            throw GeometryError("path visits blocked node (step " + std::to_string(n.step) + ", alt " +
                                to_shortest(n.alt) + ")");
        }
    }
    path.moves.reserve(nodes.size() - 1);
    path.trace.reserve(nodes.size() - 1);
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        Move m;
        if (!classify(nodes[i - 1], nodes[i], m)) throw GeometryError("illegal move between consecutive path nodes");
        const double len = move_length(profile.track, nodes[i - 1].step, m);
        path.moves.push_back(m);
        path.trace.push_back({len, static_cast<double>(profile.sinr(nodes[i].step, nodes[i].level))});
        path.length_m += len;
    }
    path.nodes = std::move(nodes);
    return path;
}

void check_path(const PathProfile& profile, const FlightPath& path) {
    if (path.nodes.empty()) throw GeometryError("empty path");
    if (path.nodes.front().step != 0) throw GeometryError("path must start at step 0");
    if (path.nodes.back().step + 1 != profile.n_steps()) throw GeometryError("path must end at the final step");
    if (path.moves.size() + 1 != path.nodes.size() || path.trace.size() != path.moves.size()) {
        throw GeometryError("moves/trace do not match nodes");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        const auto& n = path.nodes[i];
        if (n.level >= profile.nz || profile.is_blocked(n.step, n.level)) throw GeometryError("blocked node on path");
        if (n.alt != profile.altitude(n.level)) throw GeometryError("node altitude disagrees with its level");
        if (i == 0) continue;
        Move m;
        if (!classify(path.nodes[i - 1], n, m) || m != path.moves[i - 1]) throw GeometryError("illegal move");
        const double len = move_length(profile.track, path.nodes[i - 1].step, m);
        if (path.trace[i - 1].length_m != len) throw GeometryError("trace length mismatch");
        if (path.trace[i - 1].sinr_db != static_cast<double>(profile.sinr(n.step, n.level))) {
            throw GeometryError("trace SINR mismatch");
        }
        total += len;
    }
    if (total != path.length_m) throw GeometryError("length_m is not the sum of segment lengths");
}

double path_length(const FlightPath& path) {
    double total = 0.0;
    for (const auto& seg : path.trace) total += seg.length_m;
    return total;
}

double step_cost(double move_length_m, double arrival_sinr_db, const AStarConfig& config) {
    const double coverage = (config.sinr_threshold_db - arrival_sinr_db) / config.cost_normalization;
    const double cost = move_length_m + coverage;
    if (config.allow_negative_costs) return cost;
    return std::max(cost, config.edge_cost_floor);
}

double path_cost(const FlightPath& path, const AStarConfig& config) {
    double g = 0.0;
    for (const auto& seg : path.trace) g += step_cost(seg.length_m, seg.sinr_db, config);
    return g;
}

// ---------------------------------------------------------------------------
// Baselines

FlightPath plan_straight(const PathProfile& profile) {
    profile.validate();
    const double required = *std::max_element(profile.min_alt_m.begin(), profile.min_alt_m.end());
    const double top = profile.altitude(profile.nz - 1);
    if (required > top) throw NoAirspaceError(0, "straight altitude " + to_shortest(required) + " m above the ceiling");
    auto clears_track = [&](std::size_t k) {
        for (std::size_t s = 0; s < profile.n_steps(); ++s) {
            if (profile.is_blocked(s, k)) return false;
        }
        return true;
    };
    // Unreachable voxels can sit above min_alt only in hand-made profiles.
    std::size_t level = profile.index_at_or_above(required);
    while (level < profile.nz && !clears_track(level)) ++level;
    if (level >= profile.nz) throw NoAirspaceError(0, "no constant altitude clears the whole track");
    std::vector<std::size_t> targets(profile.n_steps(), level);
    return follow_targets(profile, targets);
}

FlightPath plan_agl(const PathProfile& profile, double clearance_m) {
    profile.validate();
    std::vector<std::size_t> targets(profile.n_steps());
    for (std::size_t s = 0; s < profile.n_steps(); ++s) {
        // max(terrain + clearance, min_alt) == max(terrain + 22, roof + 3 on buildings)
        const double want = std::max(profile.terrain_m[s] + clearance_m, profile.min_alt_m[s]);
        std::size_t k = profile.index_at_or_above(want);
        while (k < profile.nz && profile.is_blocked(s, k)) ++k;
        targets[s] = k < profile.nz ? k : profile.lowest_open(s);
    }
    return follow_targets(profile, targets);
}

FlightPath plan_och(const PathProfile& profile) {
    profile.validate();
    std::vector<std::size_t> targets(profile.n_steps());
    for (std::size_t s = 0; s < profile.n_steps(); ++s) {
        std::size_t best = profile.nz;
        for (std::size_t k = 0; k < profile.nz; ++k) {
            if (profile.is_blocked(s, k)) continue;
            if (best == profile.nz || profile.sinr(s, k) > profile.sinr(s, best)) best = k;
        }
        targets[s] = best;
    }
    return follow_targets(profile, targets);
}

// ---------------------------------------------------------------------------
// Coverage-aware A*

namespace {

struct OpenEntry {
    double f;
    double g;
    std::size_t level;
    std::size_t step;
};

// std::priority_queue pops the "largest"; invert so the smallest f wins, then
// smaller g, lower altitude, earlier step.
struct WorseEntry {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const noexcept {
        if (a.f != b.f) return a.f > b.f;
        if (a.g != b.g) return a.g > b.g;
        if (a.level != b.level) return a.level > b.level;
        return a.step > b.step;
    }
};

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

} // namespace

SearchResult search_caa_star(const PathProfile& profile, const AStarConfig& config) {
    config.validate();
    profile.validate();
    const std::size_t n_steps = profile.n_steps();
    const std::size_t nz = profile.nz;
    const std::size_t start_s = 0, start_k = profile.lowest_open(0);
    const std::size_t goal_s = n_steps - 1, goal_k = profile.lowest_open(goal_s);
    const double goal_pos = profile.track.step_positions[goal_s];
    const double goal_alt = profile.altitude(goal_k);

    // Clamped edges cost at least the floor while spanning up to sqrt(3) m,
    // so the straight-line heuristic is scaled to stay consistent.
    const double weight = config.allow_negative_costs ? 1.0 : config.edge_cost_floor / 2.0;
    auto heuristic = [&](std::size_t s, std::size_t k) {
        return weight * std::hypot(goal_pos - profile.track.step_positions[s], goal_alt - profile.altitude(k));
    };

    const std::size_t total = n_steps * nz;
    std::vector<double> g(total, std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> parent(total, kNoParent);
    std::vector<std::uint8_t> closed(total, 0);
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, WorseEntry> open;

    g[profile.index(start_s, start_k)] = 0.0;
    open.push({heuristic(start_s, start_k), 0.0, start_k, start_s});

    struct Neighbor {
        int ds, dk;
        Move move;
    };
    static constexpr Neighbor kNeighbors[] = {
        {1, 0, Move::H}, {0, 1, Move::VUp}, {0, -1, Move::VDown}, {1, 1, Move::DUp}, {1, -1, Move::DDown},
    };

    SearchResult result;
    bool found = false;
    while (!open.empty()) {
        const OpenEntry cur = open.top();
        open.pop();
        const std::size_t id = profile.index(cur.step, cur.level);
        if (closed[id] || cur.g > g[id]) continue;
        closed[id] = 1;
        ++result.expansions;
        if (cur.step == goal_s && cur.level == goal_k) {
            found = true;
            break;
        }
        for (const auto& nb : kNeighbors) {
            const std::size_t s = cur.step + static_cast<std::size_t>(nb.ds);
            if (s >= n_steps) continue;
            if (nb.dk < 0 && cur.level == 0) continue;
            const std::size_t k = cur.level + static_cast<std::size_t>(static_cast<long>(nb.dk));
            if (k >= nz || profile.is_blocked(s, k)) continue;
            const std::size_t nid = profile.index(s, k);
            if (closed[nid]) continue;
            const double cost = step_cost(move_length(profile.track, cur.step, nb.move), profile.sinr(s, k), config);
            const double ng = cur.g + cost;
            if (ng < g[nid]) {
                g[nid] = ng;
                parent[nid] = static_cast<std::uint32_t>(id);
                open.push({ng + heuristic(s, k), ng, k, s});
            }
        }
    }
    if (!found) throw NoPathError("goal unreachable: the corridor is blocked");

    std::vector<PathNode> nodes;
    for (std::uint32_t id = static_cast<std::uint32_t>(profile.index(goal_s, goal_k)); id != kNoParent; id = parent[id]) {
        nodes.push_back(node_at(profile, id / nz, id % nz));
    }
    std::reverse(nodes.begin(), nodes.end());
    result.cost = g[profile.index(goal_s, goal_k)];
    result.path = make_path(profile, std::move(nodes));
    return result;
}

FlightPath plan_caa_star(const PathProfile& profile, const AStarConfig& config) {
    return search_caa_star(profile, config).path;
}

// ---------------------------------------------------------------------------

const char* planner_name(PlannerKind kind) noexcept {
    switch (kind) {
    case PlannerKind::Straight: return "straight";
    case PlannerKind::Agl: return "agl";
    case PlannerKind::Och: return "och";
    case PlannerKind::CaaStar: return "caa_star";
    }
    return "?";
}

const std::vector<PlannerKind>& all_planners() {
    static const std::vector<PlannerKind> kinds = {PlannerKind::Straight, PlannerKind::Agl, PlannerKind::CaaStar,
                                                   PlannerKind::Och};
    return kinds;
}

PlannerKind planner_from_name(const std::string& name) {
    for (auto k : all_planners()) {
        if (name == planner_name(k)) return k;
    }
    throw ConfigError("unknown planner '" + name + "' (known planners: straight, agl, caa_star, och)");
}

FlightPath plan(PlannerKind kind, const PathProfile& profile, const AStarConfig& config) {
    switch (kind) {
    case PlannerKind::Straight: return plan_straight(profile);
    case PlannerKind::Agl: return plan_agl(profile);
    case PlannerKind::Och: return plan_och(profile);
    case PlannerKind::CaaStar: return plan_caa_star(profile, config);
    }
    throw ConfigError("unknown planner");
}

void write_path_csv(std::ostream& out, const PathProfile& profile, const FlightPath& path) {
    out << "node_index,step,cum_distance_m,altitude_m,sinr_db,move_type\n";
    double dist = 0.0;
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        const auto& n = path.nodes[i];
        if (i > 0) dist += path.trace[i - 1].length_m;
        out << i << ',' << n.step << ',' << to_shortest(dist) << ',' << to_shortest(n.alt) << ','
            << to_shortest(profile.sinr(n.step, n.level)) << ',' << (i == 0 ? "start" : move_name(path.moves[i - 1]))
            << '\n';
    }
}

} // namespace uavcov
