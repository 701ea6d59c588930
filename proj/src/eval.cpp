#include "uavcov/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "uavcov/error.hpp"
#include "uavcov/format.hpp"
#include "uavcov/parallel.hpp"
#include "uavcov/rng.hpp"

namespace uavcov {

std::vector<OutageRun> outage_runs(const FlightPath& path, double threshold_db) {
    std::vector<OutageRun> runs;
    double dist = 0.0;
    bool in_run = false;
    for (const auto& seg : path.trace) {
        if (seg.sinr_db <= threshold_db) {
            if (!in_run) runs.push_back({dist, 0.0});
            runs.back().length_m += seg.length_m;
            in_run = true;
        } else {
            in_run = false;
        }
        dist += seg.length_m;
    }
    return runs;
}

std::vector<EndpointPair> sample_endpoints(const Roi& roi, std::size_t n, std::uint64_t seed, double min_separation_m) {
    if (roi.width() <= 0 || roi.height() <= 0) throw ParameterError("empty region of interest");
    const double diagonal = std::hypot(static_cast<double>(roi.width() - 1), static_cast<double>(roi.height() - 1));
    if (min_separation_m > diagonal) {
        throw ParameterError("min_separation_m " + to_shortest(min_separation_m) + " exceeds the ROI diagonal " +
                             to_shortest(diagonal));
    }
    Rng rng(seed);
    auto draw = [&] {
        return Cell{static_cast<long>(rng.uniform_int(roi.x0, roi.x1 - 1)),
                    static_cast<long>(rng.uniform_int(roi.y0, roi.y1 - 1))};
    };
    std::vector<EndpointPair> pairs;
    pairs.reserve(n);
    const std::size_t max_attempts = 1000 * (n + 1);
    std::size_t attempts = 0;
    while (pairs.size() < n) {
        if (++attempts > max_attempts) throw ParameterError("could not place endpoint pairs at the requested separation");
        const Cell a = draw();
        const Cell b = draw();
        if (std::hypot(static_cast<double>(b.x - a.x), static_cast<double>(b.y - a.y)) < min_separation_m) continue;
        if (a == b) continue;
        pairs.push_back({a, b});
    }
    return pairs;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
    if (values.empty()) throw DomainError("empirical CDF of an empty sample");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> cdf;
    const auto n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    cdf.back().second = 1.0;
    return cdf;
}

std::vector<std::pair<double, double>> thin_cdf(const std::vector<std::pair<double, double>>& cdf,
                                                std::size_t max_points) {
    if (max_points == 0 || cdf.size() <= max_points) return cdf;
    std::vector<std::pair<double, double>> out;
    out.reserve(max_points);
    const std::size_t n = cdf.size();
    for (std::size_t i = 1; i <= max_points; ++i) out.push_back(cdf[(i * n) / max_points - 1]);
    return out;
}

PlannerStats aggregate_paths(const std::string& planner, const std::string& band, const std::vector<FlightPath>& paths,
                             const std::vector<double>& baseline_lengths, double threshold_db) {
    if (paths.size() != baseline_lengths.size()) throw ParameterError("one baseline length per path required");
    PlannerStats st;
    st.planner = planner;
    st.band = band;
    st.n_trajectories = paths.size();
    double weighted_sinr = 0.0;
    double norm_sum = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& path = paths[i];
        for (const auto& seg : path.trace) {
            weighted_sinr += seg.length_m * seg.sinr_db;
            st.sinr_samples.push_back(seg.sinr_db);
        }
        st.total_length_m += path.length_m;
        for (const auto& run : outage_runs(path, threshold_db)) {
            st.outage_duration_values.push_back(run.length_m);
            st.total_outage_m += run.length_m;
        }
        norm_sum += path.length_m / baseline_lengths[i];
    }
    if (st.n_trajectories > 0) {
        st.mean_sinr_db = st.total_length_m > 0.0 ? weighted_sinr / st.total_length_m : 0.0;
        st.outage_probability = st.total_length_m > 0.0 ? st.total_outage_m / st.total_length_m : 0.0;
        st.mean_normalized_length = norm_sum / static_cast<double>(st.n_trajectories);
    }
    if (!st.outage_duration_values.empty()) {
        st.mean_outage_duration_m = st.total_outage_m / static_cast<double>(st.outage_duration_values.size());
    }
    return st;
}

const PlannerStats& EvaluationReport::at(const std::string& planner, const std::string& band) const {
    for (const auto& r : results) {
        if (r.planner == planner && r.band == band) return r;
    }
    throw ParameterError("no result for planner '" + planner + "' on band '" + band + "'");
}

EvaluationReport summarize(const CityScenario& scenario, const std::vector<BandConfig>& bands,
                           const std::vector<PlannerKind>& planners, const std::vector<EndpointPair>& pairs,
                           const EvalOptions& options) {
    if (bands.empty()) throw ConfigError("at least one band is required");
    if (planners.empty()) throw ConfigError("at least one planner is required");
    options.astar.validate();
    for (const auto& p : pairs) {
        if (!scenario.roi().contains(p.start.x, p.start.y) || !scenario.roi().contains(p.goal.x, p.goal.y)) {
            throw ParameterError("endpoint pair outside the region of interest");
        }
    }

    EvaluationReport report;
    report.seed = options.pair_seed;
    report.n_pairs = pairs.size();
    report.outage_threshold_db = options.outage_threshold_db;
    report.astar = options.astar;
    report.bands = bands;
    for (auto k : planners) report.planners.push_back(planner_name(k));

    std::optional<LosTable> los;
    for (const auto& band : bands) {
        CoverageVolume volume;
        if (options.volume_source) {
            volume = options.volume_source(band);
        } else {
            if (!los) los.emplace(scenario, options.workers);
            volume = compute_coverage_volume(scenario, band, options.workers, &*los);
        }

        // slot[i] holds the straight baseline followed by one path per planner.
        std::vector<std::optional<std::vector<FlightPath>>> slots(pairs.size());
        parallel_for(pairs.size(), options.workers, [&](std::size_t i) {
            try {
                const auto track = rasterize_track(pairs[i].start, pairs[i].goal);
                const auto profile = extract_profile(volume, scenario, track);
                std::vector<FlightPath> paths;
                paths.reserve(planners.size() + 1);
                paths.push_back(plan_straight(profile));
                for (auto k : planners) {
                    paths.push_back(k == PlannerKind::Straight ? paths.front() : plan(k, profile, options.astar));
                }
                slots[i] = std::move(paths);
            } catch (const NoAirspaceError&) {
            } catch (const NoPathError&) {
            }
        });

        std::size_t excluded = 0;
        std::vector<std::vector<FlightPath>> per_planner(planners.size());
        std::vector<double> baselines;
        for (auto& slot : slots) {
            if (!slot) {
                ++excluded;
                continue;
            }
            baselines.push_back((*slot)[0].length_m);
            for (std::size_t p = 0; p < planners.size(); ++p) per_planner[p].push_back(std::move((*slot)[p + 1]));
        }
        report.excluded.emplace_back(band.name, excluded);
        for (std::size_t p = 0; p < planners.size(); ++p) {
            report.results.push_back(aggregate_paths(planner_name(planners[p]), band.name, per_planner[p], baselines,
                                                     options.outage_threshold_db));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Output

nlohmann::json report_to_json(const EvaluationReport& report, std::size_t cdf_max_points) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : report.bands) bands.push_back(band_to_json(b));
    nlohmann::json excluded = nlohmann::json::object();
    for (const auto& [band, count] : report.excluded) excluded[band] = count;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : report.results) {
        nlohmann::json cdf = nlohmann::json::array();
        if (!r.sinr_samples.empty()) {
            for (const auto& [v, f] : thin_cdf(empirical_cdf(r.sinr_samples), cdf_max_points)) cdf.push_back({v, f});
        }
        results.push_back({
            {"planner", r.planner},
            {"band", r.band},
            {"mean_sinr_db", r.mean_sinr_db},
            {"outage_probability", r.outage_probability},
            {"mean_outage_duration_m",
             r.mean_outage_duration_m ? nlohmann::json(*r.mean_outage_duration_m) : nlohmann::json(nullptr)},
            {"n_outage_runs", r.outage_duration_values.size()},
            {"outage_duration_values", r.outage_duration_values},
            {"sinr_cdf_points", cdf},
            {"mean_normalized_length", r.mean_normalized_length},
            {"total_length_m", r.total_length_m},
            {"total_outage_m", r.total_outage_m},
            {"n_trajectories", r.n_trajectories},
        });
    }
    return {
        {"seed", report.seed},
        {"n_pairs", report.n_pairs},
        {"outage_threshold_db", report.outage_threshold_db},
        {"astar",
         {{"sinr_threshold_db", report.astar.sinr_threshold_db},
          {"cost_normalization", report.astar.cost_normalization},
          {"edge_cost_floor", report.astar.edge_cost_floor},
          {"allow_negative_costs", report.astar.allow_negative_costs}}},
        {"bands", bands},
        {"planners", report.planners},
        {"excluded", excluded},
        {"results", results},
    };
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void write_cdf(const std::filesystem::path& path, const char* header,
               const std::vector<std::pair<double, double>>& cdf) {
    auto out = open_csv(path);
    out << header << '\n';
    for (const auto& [v, f] : cdf) out << to_shortest(v) << ',' << to_shortest(f) << '\n';
}

std::string opt_number(const nlohmann::json& j) { return j.is_null() ? "" : to_shortest(j.get<double>()); }

} // namespace

void write_plot_csvs(const EvaluationReport& report, const std::string& dir) {
    write_plot_csvs_from_json(report_to_json(report, 0), dir);
}

void write_plot_csvs_from_json(const nlohmann::json& report, const std::string& dir) {
    const std::filesystem::path base(dir);
    std::filesystem::create_directories(base);
    auto summary = open_csv(base / "summary.csv");
    summary << "planner,band,mean_sinr_db,outage_prob,mean_outage_m,mean_norm_length\n";
    try {
        for (const auto& r : report.at("results")) {
            const auto planner = r.at("planner").get<std::string>();
            const auto band = r.at("band").get<std::string>();
            summary << planner << ',' << band << ',' << to_shortest(r.at("mean_sinr_db").get<double>()) << ','
                    << to_shortest(r.at("outage_probability").get<double>()) << ','
                    << opt_number(r.at("mean_outage_duration_m")) << ','
                    << to_shortest(r.at("mean_normalized_length").get<double>()) << '\n';

            std::vector<std::pair<double, double>> sinr_cdf;
            for (const auto& pt : r.at("sinr_cdf_points")) sinr_cdf.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
            write_cdf(base / ("sinr_cdf_" + planner + "_" + band + ".csv"), "sinr_db,fraction", sinr_cdf);

            auto durations = r.at("outage_duration_values").get<std::vector<double>>();
            write_cdf(base / ("outage_cdf_" + planner + "_" + band + ".csv"), "duration_m,fraction",
                      durations.empty() ? std::vector<std::pair<double, double>>{} : empirical_cdf(durations));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed report: ") + e.what());
    }
}

} // namespace uavcov
