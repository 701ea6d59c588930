#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uavcov/planners.hpp"
#include "uavcov/radio.hpp"

namespace uavcov {

inline constexpr double kOutageThresholdDb = -6.0;

/// A maximal stretch of flown path with SINR at or below the threshold.
struct OutageRun {
    double start_distance_m = 0.0;
    double length_m = 0.0;
};

std::vector<OutageRun> outage_runs(const FlightPath& path, double threshold_db = kOutageThresholdDb);

struct EndpointPair {
    Cell start;
    Cell goal;

    friend bool operator==(const EndpointPair&, const EndpointPair&) = default;
};

/// Uniform endpoint pairs inside the ROI, at least `min_separation_m` apart.
std::vector<EndpointPair> sample_endpoints(const Roi& roi, std::size_t n, std::uint64_t seed,
                                           double min_separation_m = 100.0);

/// (value, fraction of samples <= value), one point per distinct value.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

struct PlannerStats {
    std::string planner;
    std::string band;
    double mean_sinr_db = 0.0;
    double outage_probability = 0.0;
    std::optional<double> mean_outage_duration_m;
    std::vector<double> outage_duration_values;
    std::vector<double> sinr_samples;
    double mean_normalized_length = 0.0;
    double total_length_m = 0.0;
    double total_outage_m = 0.0;
    std::size_t n_trajectories = 0;
};

/// Pools one planner's paths for one band. `baseline_lengths[i]` is the
/// straight planner's length for the same pair as `paths[i]`.
PlannerStats aggregate_paths(const std::string& planner, const std::string& band, const std::vector<FlightPath>& paths,
                             const std::vector<double>& baseline_lengths, double threshold_db = kOutageThresholdDb);

struct EvalOptions {
    AStarConfig astar;
    double outage_threshold_db = kOutageThresholdDb;
    unsigned workers = 1;
    std::uint64_t pair_seed = 0;
    /// Points kept per SINR CDF in the JSON report; 0 keeps all.
    std::size_t cdf_max_points = 1000;
    /// Supplies the volume for a band; computed in-process when unset.
    std::function<CoverageVolume(const BandConfig&)> volume_source;
};

struct EvaluationReport {
    std::uint64_t seed = 0;
    std::size_t n_pairs = 0;
    double outage_threshold_db = kOutageThresholdDb;
    AStarConfig astar;
    std::vector<BandConfig> bands;
    std::vector<std::string> planners;
    std::vector<std::pair<std::string, std::size_t>> excluded; ///< per band
    std::vector<PlannerStats> results;                         ///< planner-major within each band

    const PlannerStats& at(const std::string& planner, const std::string& band) const;
};

EvaluationReport summarize(const CityScenario& scenario, const std::vector<BandConfig>& bands,
                           const std::vector<PlannerKind>& planners, const std::vector<EndpointPair>& pairs,
                           const EvalOptions& options = {});

/// CDF thinned to at most max_points by rank; the last point is always kept.
std::vector<std::pair<double, double>> thin_cdf(const std::vector<std::pair<double, double>>& cdf,
                                                std::size_t max_points);

nlohmann::json report_to_json(const EvaluationReport& report, std::size_t cdf_max_points = 1000);

/// Writes summary.csv plus sinr_cdf_<planner>_<band>.csv and
/// outage_cdf_<planner>_<band>.csv into `dir`.
void write_plot_csvs(const EvaluationReport& report, const std::string& dir);

/// Same files from a report JSON (SINR CDFs as stored in the JSON).
void write_plot_csvs_from_json(const nlohmann::json& report, const std::string& dir);

} // namespace uavcov
