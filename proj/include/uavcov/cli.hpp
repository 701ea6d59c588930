#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavcov/eval.hpp"
#include "uavcov/planners.hpp"
#include "uavcov/radio.hpp"
#include "uavcov/terrain.hpp"

namespace uavcov::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kRuntimeError = 3,
};

struct RunConfig {
    // Scenario: a descriptor file, or generator params with a seed.
    std::string scenario_file;
    std::optional<CityParams> generator;
    std::optional<std::uint64_t> city_seed;

    std::vector<BandConfig> bands;
    std::vector<PlannerKind> planners;
    AStarConfig astar;
    std::size_t n_pairs = 200;
    std::optional<std::uint64_t> pair_seed;
    double min_separation_m = 100.0;
    double outage_threshold_db = kOutageThresholdDb;
    std::size_t cdf_max_points = 1000;
    unsigned workers = 1;
    bool use_cache = true;
    std::string out_dir = "out";

    void validate() const;
};

/// Parses a run config document. Relative scenario paths resolve against
/// `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir);
RunConfig load_run_config(const std::string& path);

CityScenario resolve_scenario(const RunConfig& config);

/// Content hash over grids, stations, ROI and threshold.
std::uint64_t scenario_hash(const CityScenario& scenario);
std::uint64_t band_hash(const BandConfig& band);

/// Loads the cached volume for (scenario, band) from `cache_dir`, or
/// computes and stores it. On a miss the LoS table is built into `los`
/// (when given) so later bands can reuse it.
CoverageVolume cached_volume(const CityScenario& scenario, const BandConfig& band, const std::string& cache_dir,
                             unsigned workers, std::optional<LosTable>* los = nullptr);

/// Writes dtm.asc, dsm.asc and scenario.json into `out_dir`.
void cmd_gen_city(const CityParams& params, std::uint64_t seed, const std::string& out_dir);

struct VolumeStats {
    std::size_t voxels = 0;
    std::size_t reachable = 0;
    double min_sinr_db = 0.0;
    double mean_sinr_db = 0.0;
    double max_sinr_db = 0.0;
};

VolumeStats volume_stats(const CoverageVolume& volume);

/// Computes the band's volume and writes it to `out_file`.
VolumeStats cmd_coverage(const CityScenario& scenario, const BandConfig& band, const std::string& out_file,
                         unsigned workers);

/// Plans one pair and writes the path CSV.
FlightPath cmd_plan(const CityScenario& scenario, const BandConfig& band, PlannerKind planner,
                    const AStarConfig& astar, const EndpointPair& pair, std::ostream& csv, unsigned workers);

/// Runs the full evaluation; writes report.json and the plot CSVs.
EvaluationReport cmd_evaluate(const RunConfig& config);

/// Writes the path profile CSV for one pair.
void cmd_export_profile(const CityScenario& scenario, const BandConfig& band, const EndpointPair& pair,
                        std::ostream& csv, unsigned workers);

/// Regenerates the plot CSVs from an existing report.json.
void cmd_export_report(const std::string& report_file, const std::string& out_dir);

/// Entry point used by the executable; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace uavcov::cli
