#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "uavcov/profile.hpp"

namespace uavcov {

enum class Move { H, VUp, VDown, DUp, DDown };

const char* move_name(Move m) noexcept;

struct PathNode {
    std::size_t step = 0;
    std::size_t level = 0; ///< altitude index into the profile
    double alt = 0.0;      ///< absolute altitude, m

    friend bool operator==(const PathNode&, const PathNode&) = default;
};

struct TraceSegment {
    double length_m = 0.0;
    double sinr_db = 0.0; ///< at the arrival node
};

struct FlightPath {
    std::vector<PathNode> nodes;
    std::vector<Move> moves;
    std::vector<TraceSegment> trace;
    double length_m = 0.0;
};

struct AStarConfig {
    double sinr_threshold_db = -3.0;
    double cost_normalization = 1.5;
    double edge_cost_floor = 0.001;
    bool allow_negative_costs = false;

    void validate() const;
};

/// Length of one move leaving `from_step`: horizontal moves take the track
/// increment, vertical moves 1 m, diagonals the Euclidean combination.
double move_length(const GroundTrack& track, std::size_t from_step, Move m);

/// Assembles moves, trace and length for a node sequence. Throws
/// GeometryError on an illegal transition or a blocked node.
FlightPath make_path(const PathProfile& profile, std::vector<PathNode> nodes);

/// Verifies every FlightPath invariant against the profile.
void check_path(const PathProfile& profile, const FlightPath& path);

double path_length(const FlightPath& path);

/// Edge cost: move length plus (threshold - arrival SINR) / normalization,
/// floored at edge_cost_floor unless negative costs are allowed.
double step_cost(double move_length_m, double arrival_sinr_db, const AStarConfig& config);

/// Sum of step_cost along the path, accumulated from the start.
double path_cost(const FlightPath& path, const AStarConfig& config);

FlightPath plan_straight(const PathProfile& profile);
FlightPath plan_agl(const PathProfile& profile, double clearance_m = 22.0);
FlightPath plan_och(const PathProfile& profile);

struct SearchResult {
    FlightPath path;
    double cost = 0.0;
    std::size_t expansions = 0;
};

/// Coverage-aware A* over (step, altitude) nodes from the lowest open
/// altitude at the first step to the lowest open altitude at the last.
SearchResult search_caa_star(const PathProfile& profile, const AStarConfig& config);
FlightPath plan_caa_star(const PathProfile& profile, const AStarConfig& config = {});

enum class PlannerKind { Straight, Agl, Och, CaaStar };

const char* planner_name(PlannerKind kind) noexcept;
PlannerKind planner_from_name(const std::string& name);
const std::vector<PlannerKind>& all_planners();

FlightPath plan(PlannerKind kind, const PathProfile& profile, const AStarConfig& config = {});

/// CSV: node_index, step, cum_distance_m, altitude_m, sinr_db, move_type.
/// cum_distance_m is the flown distance; move_type is the move arriving at
/// the node ("start" for the first).
void write_path_csv(std::ostream& out, const PathProfile& profile, const FlightPath& path);

} // namespace uavcov
