#include "uavcov/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "uavcov/error.hpp"
#include "uavcov/format.hpp"
#include "uavcov/hash.hpp"
#include "uavcov/profile.hpp"

namespace fs = std::filesystem;

namespace uavcov::cli {

// ---------------------------------------------------------------------------
// Config

void RunConfig::validate() const {
    if (bands.empty()) throw ConfigError("at least one band is required");
    if (planners.empty()) throw ConfigError("at least one planner is required");
    if (scenario_file.empty() && !generator) throw ConfigError("no scenario: give --scenario or generator params");
    if (scenario_file.empty() && !city_seed) throw ConfigError("generator scenarios need an explicit city seed");
    if (workers == 0) throw ConfigError("workers must be >= 1");
    astar.validate();
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::string& base_dir) {
    static const std::set<std::string> known = {"scenario", "bands", "planners", "astar", "pairs", "outage_threshold_db",
                                                "cdf_max_points", "workers", "cache", "out"};
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("run config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (!known.count(key)) throw ConfigError("unknown run config key '" + key + "'");
        }
        if (j.contains("scenario")) {
            const auto& s = j.at("scenario");
            if (s.is_string()) {
                const fs::path p(s.get<std::string>());
                c.scenario_file = (p.is_absolute() || base_dir.empty() ? p : fs::path(base_dir) / p).string();
            } else {
                c.generator = city_params_from_json(s.value("generator", nlohmann::json::object()));
                if (s.contains("seed")) c.city_seed = s.at("seed").get<std::uint64_t>();
            }
        }
        if (j.contains("bands")) {
            for (const auto& b : j.at("bands")) c.bands.push_back(band_from_json(b));
        }
        if (j.contains("planners")) {
            for (const auto& p : j.at("planners")) c.planners.push_back(planner_from_name(p.get<std::string>()));
        }
        if (j.contains("astar")) {
            const auto& a = j.at("astar");
            c.astar.sinr_threshold_db = a.value("sinr_threshold_db", c.astar.sinr_threshold_db);
            c.astar.cost_normalization = a.value("cost_normalization", c.astar.cost_normalization);
            c.astar.edge_cost_floor = a.value("edge_cost_floor", c.astar.edge_cost_floor);
            c.astar.allow_negative_costs = a.value("allow_negative_costs", c.astar.allow_negative_costs);
        }
        if (j.contains("pairs")) {
            const auto& p = j.at("pairs");
            c.n_pairs = p.value("count", c.n_pairs);
            if (p.contains("seed")) c.pair_seed = p.at("seed").get<std::uint64_t>();
            c.min_separation_m = p.value("min_separation_m", c.min_separation_m);
        }
        c.outage_threshold_db = j.value("outage_threshold_db", c.outage_threshold_db);
        c.cdf_max_points = j.value("cdf_max_points", c.cdf_max_points);
        c.workers = j.value("workers", c.workers);
        c.use_cache = j.value("cache", c.use_cache);
        if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j, fs::path(path).parent_path().string());
}

CityScenario resolve_scenario(const RunConfig& config) {
    if (!config.scenario_file.empty()) return load_scenario_file(config.scenario_file);
    if (!config.generator) throw ConfigError("no scenario configured");
    if (!config.city_seed) throw ConfigError("generator scenarios need an explicit city seed");
    return generate_city(*config.generator, *config.city_seed);
}

// ---------------------------------------------------------------------------
// Volume cache

namespace {

template <typename T>
std::uint64_t hash_bytes(const T* data, std::size_t n, std::uint64_t h) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(data), n * sizeof(T)), h);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

} // namespace

std::uint64_t scenario_hash(const CityScenario& s) {
    std::uint64_t h = fnv1a64("scenario-v1");
    for (const auto* grid : {&s.terrain(), &s.surface()}) {
        const std::uint64_t dims[] = {grid->rows(), grid->cols(), grid->nodata_count()};
        h = hash_bytes(dims, 3, h);
        h = hash_bytes(grid->values().data(), grid->values().size(), h);
    }
    for (const auto& st : s.stations()) {
        h = fnv1a64(st.id, h);
        const double v[] = {st.x, st.y, st.mast_height};
        h = hash_bytes(v, 3, h);
    }
    const long roi[] = {s.roi().x0, s.roi().y0, s.roi().x1, s.roi().y1};
    h = hash_bytes(roi, 4, h);
    const double threshold = s.building_threshold();
    return hash_bytes(&threshold, 1, h);
}

std::uint64_t band_hash(const BandConfig& band) { return fnv1a64(band_to_json(band).dump()); }

CoverageVolume cached_volume(const CityScenario& scenario, const BandConfig& band, const std::string& cache_dir,
                             unsigned workers, std::optional<LosTable>* los) {
    const auto key = hex64(fnv1a64(hex64(band_hash(band)), scenario_hash(scenario)));
    const fs::path path = fs::path(cache_dir) / ("volume_" + band.name + "_" + key + ".bin");
    if (fs::exists(path)) {
        try {
            auto v = load_volume(path.string());
            if (v.band_name == band.name && v.origin_x == scenario.roi().x0 && v.origin_y == scenario.roi().y0 &&
                static_cast<long>(v.nx) == scenario.roi().width() && static_cast<long>(v.ny) == scenario.roi().height()) {
                return v;
            }
        } catch (const IoError&) {
            // Unreadable cache entries are recomputed.
        }
    }
    const LosTable* table = nullptr;
    if (los) {
        if (!*los) los->emplace(scenario, workers);
        table = &**los;
    }
    auto volume = compute_coverage_volume(scenario, band, workers, table);
    fs::create_directories(cache_dir);
    const fs::path tmp = path.string() + ".tmp";
    save_volume(tmp.string(), volume);
    fs::rename(tmp, path);
    return volume;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_gen_city(const CityParams& params, std::uint64_t seed, const std::string& out_dir) {
    const auto scenario = generate_city(params, seed);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
    const fs::path base(out_dir);
    save_surface_raster((base / "dtm.asc").string(), scenario.terrain());
    save_surface_raster((base / "dsm.asc").string(), scenario.surface());
    std::ofstream out(base / "scenario.json", std::ios::binary);
    if (!out) throw IoError("cannot write '" + (base / "scenario.json").string() + "'");
    out << scenario_descriptor(scenario, "dtm.asc", "dsm.asc").dump(2) << '\n';
    if (!out) throw IoError("write failed for scenario.json");
}

VolumeStats volume_stats(const CoverageVolume& v) {
    VolumeStats st;
    st.voxels = v.sinr_db.size();
    double sum = 0.0;
    st.min_sinr_db = std::numeric_limits<double>::infinity();
    st.max_sinr_db = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.sinr_db.size(); ++i) {
        if (v.serving[i] == kUnreachable) continue;
        const double s = v.sinr_db[i];
        ++st.reachable;
        sum += s;
        st.min_sinr_db = std::min(st.min_sinr_db, s);
        st.max_sinr_db = std::max(st.max_sinr_db, s);
    }
    if (st.reachable) st.mean_sinr_db = sum / static_cast<double>(st.reachable);
    return st;
}

VolumeStats cmd_coverage(const CityScenario& scenario, const BandConfig& band, const std::string& out_file,
                         unsigned workers) {
    const auto volume = compute_coverage_volume(scenario, band, workers);
    const auto parent = fs::path(out_file).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    save_volume(out_file, volume);
    return volume_stats(volume);
}

namespace {

PathProfile profile_for(const CityScenario& scenario, const BandConfig& band, const EndpointPair& pair,
                        unsigned workers) {
    const auto& roi = scenario.roi();
    if (!roi.contains(pair.start.x, pair.start.y) || !roi.contains(pair.goal.x, pair.goal.y)) {
        throw ConfigError("endpoints must lie inside the region of interest");
    }
    const auto volume = compute_coverage_volume(scenario, band, workers);
    return extract_profile(volume, scenario, rasterize_track(pair.start, pair.goal));
}

} // namespace

FlightPath cmd_plan(const CityScenario& scenario, const BandConfig& band, PlannerKind planner,
                    const AStarConfig& astar, const EndpointPair& pair, std::ostream& csv, unsigned workers) {
    const auto profile = profile_for(scenario, band, pair, workers);
    auto path = plan(planner, profile, astar);
    write_path_csv(csv, profile, path);
    return path;
}

void cmd_export_profile(const CityScenario& scenario, const BandConfig& band, const EndpointPair& pair,
                        std::ostream& csv, unsigned workers) {
    write_profile_csv(csv, profile_for(scenario, band, pair, workers));
}

EvaluationReport cmd_evaluate(const RunConfig& config) {
    config.validate();
    if (!config.pair_seed) throw ConfigError("evaluate needs an explicit pair seed (--seed or pairs.seed)");
    const auto scenario = resolve_scenario(config);
    const auto pairs = sample_endpoints(scenario.roi(), config.n_pairs, *config.pair_seed, config.min_separation_m);

    EvalOptions options;
    options.astar = config.astar;
    options.outage_threshold_db = config.outage_threshold_db;
    options.workers = config.workers;
    options.pair_seed = *config.pair_seed;
    options.cdf_max_points = config.cdf_max_points;

    std::optional<LosTable> los;
    const std::string cache_dir = (fs::path(config.out_dir) / "cache").string();
    options.volume_source = [&](const BandConfig& band) {
        if (!config.use_cache) {
            if (!los) los.emplace(scenario, config.workers);
            return compute_coverage_volume(scenario, band, config.workers, &*los);
        }
        return cached_volume(scenario, band, cache_dir, config.workers, &los);
    };

    auto report = summarize(scenario, config.bands, config.planners, pairs, options);

    fs::create_directories(config.out_dir);
    auto json = report_to_json(report, config.cdf_max_points);
    json["scenario_hash"] = hex64(scenario_hash(scenario));
    if (const auto& prov = scenario.provenance()) json["city_seed"] = prov->second;
    json["min_separation_m"] = config.min_separation_m;
    {
        std::ofstream out(fs::path(config.out_dir) / "report.json", std::ios::binary);
        if (!out) throw IoError("cannot write report.json in '" + config.out_dir + "'");
        out << json.dump(2) << '\n';
    }
    write_plot_csvs(report, config.out_dir);
    return report;
}

void cmd_export_report(const std::string& report_file, const std::string& out_dir) {
    std::ifstream in(report_file);
    if (!in) throw ConfigError("cannot open report '" + report_file + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("report '" + report_file + "' is not valid JSON: " + e.what());
    }
    write_plot_csvs_from_json(j, out_dir);
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace {

Cell parse_cell(const std::string& text, const char* flag) {
    long x = 0, y = 0;
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> x >> comma >> y) || comma != ',' || !in.eof()) {
        throw ConfigError(std::string(flag) + " expects x,y grid coordinates, got '" + text + "'");
    }
    return {x, y};
}

} // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coverage-aware UAV path planning over a 3D city model"};
    app.require_subcommand(1);

    std::string config_file, out_dir, scenario_file;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::vector<std::string> band_names, planner_names;
    app.add_option("--config", config_file, "Run config JSON")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Seed for stochastic commands (city layout / endpoint pairs)");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--band", band_names, "Band name (repeatable)");
    app.add_option("--planner", planner_names, "Planner: straight, agl, caa_star, och (repeatable)");
    app.add_option("--scenario", scenario_file, "Scenario descriptor JSON")->check(CLI::ExistingFile);

    CityParams city;
    auto* gen = app.add_subcommand("gen-city", "Synthesize a city: writes dtm.asc, dsm.asc, scenario.json");
    gen->add_option("--width", city.width_m, "Map width, m")->capture_default_str();
    gen->add_option("--height", city.height_m, "Map height, m")->capture_default_str();
    gen->add_option("--pitch", city.block_pitch_m, "Block pitch, m")->capture_default_str();
    gen->add_option("--street", city.street_width_m, "Street width, m")->capture_default_str();
    gen->add_option("--hmin", city.building_min_m, "Minimum building height, m")->capture_default_str();
    gen->add_option("--hmax", city.building_max_m, "Maximum building height, m")->capture_default_str();
    gen->add_option("--terrain-amplitude", city.terrain_amplitude_m, "Terrain relief, m")->capture_default_str();
    gen->add_option("--stations", city.n_stations, "Number of base stations")->capture_default_str();
    gen->add_option("--mast", city.mast_height_m, "Mast height above the ground at the site, m")->capture_default_str();
    gen->add_option("--buffer", city.roi_buffer_m, "Border excluded from the ROI, m")->capture_default_str();

    auto* cov = app.add_subcommand("coverage", "Compute and store the SINR volume of one band");

    std::string start_text, goal_text;
    auto* planc = app.add_subcommand("plan", "Plan one pair and print the path CSV");
    planc->add_option("--start", start_text, "Start cell x,y")->required();
    planc->add_option("--goal", goal_text, "Goal cell x,y")->required();

    std::size_t n_pairs = 0;
    auto* evalc = app.add_subcommand("evaluate", "Run the Monte-Carlo evaluation");
    evalc->add_option("--pairs", n_pairs, "Number of endpoint pairs");
    bool no_cache = false;
    evalc->add_flag("--no-cache", no_cache, "Recompute volumes instead of using the cache");

    std::string report_file;
    auto* exp = app.add_subcommand("export", "Regenerate plot CSVs from a report, or print a path profile CSV");
    exp->add_option("--report", report_file, "report.json to export from")->check(CLI::ExistingFile);
    exp->add_option("--start", start_text, "Start cell x,y (profile export)");
    exp->add_option("--goal", goal_text, "Goal cell x,y (profile export)");

    for (auto* sub : {gen, cov, planc, evalc, exp}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        nlohmann::json config_json = nlohmann::json::object();
        std::string config_base;
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            try {
                in >> config_json;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("config '" + config_file + "' is not valid JSON: " + e.what());
            }
            config_base = fs::path(config_file).parent_path().string();
        }
        RunConfig cfg = run_config_from_json(config_json, config_base);
        if (!scenario_file.empty()) {
            cfg.scenario_file = scenario_file;
            cfg.generator.reset();
        }
        if (!band_names.empty()) {
            cfg.bands.clear();
            for (const auto& b : band_names) cfg.bands.push_back(builtin_band(b));
        }
        if (!planner_names.empty()) {
            cfg.planners.clear();
            for (const auto& p : planner_names) cfg.planners.push_back(planner_from_name(p));
        }
        if (workers) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        auto single_band = [&]() -> const BandConfig& {
            if (cfg.bands.size() != 1) {
                std::string known;
                for (const auto& b : builtin_bands()) known += (known.empty() ? "" : ", ") + b.name;
                throw ConfigError("exactly one --band is required (known bands: " + known + ")");
            }
            return cfg.bands.front();
        };
        auto require_scenario = [&] {
            if (cfg.scenario_file.empty() && !cfg.generator) throw ConfigError("no scenario: give --scenario or --config");
            if (cfg.scenario_file.empty() && seed && !cfg.city_seed) cfg.city_seed = seed;
            return resolve_scenario(cfg);
        };

        if (*gen) {
            std::uint64_t city_seed;
            CityParams params = city;
            if (config_json.contains("scenario") && config_json.at("scenario").is_object()) {
                params = *cfg.generator;
                for (const auto* opt : gen->get_options()) {
                    if (opt->count() == 0) continue;
                    // Explicit flags override the config file.
                    const auto name = opt->get_name();
                    if (name == "--width") params.width_m = city.width_m;
                    else if (name == "--height") params.height_m = city.height_m;
                    else if (name == "--pitch") params.block_pitch_m = city.block_pitch_m;
                    else if (name == "--street") params.street_width_m = city.street_width_m;
                    else if (name == "--hmin") params.building_min_m = city.building_min_m;
                    else if (name == "--hmax") params.building_max_m = city.building_max_m;
                    else if (name == "--terrain-amplitude") params.terrain_amplitude_m = city.terrain_amplitude_m;
                    else if (name == "--stations") params.n_stations = city.n_stations;
                    else if (name == "--mast") params.mast_height_m = city.mast_height_m;
                    else if (name == "--buffer") params.roi_buffer_m = city.roi_buffer_m;
                }
            }
            if (seed) city_seed = *seed;
            else if (cfg.city_seed) city_seed = *cfg.city_seed;
            else throw ConfigError("gen-city needs --seed");
            cmd_gen_city(params, city_seed, cfg.out_dir);
            out << "wrote " << (fs::path(cfg.out_dir) / "scenario.json").string() << " with " << params.n_stations
                << " stations\n";
        } else if (*cov) {
            const auto& band = single_band();
            const auto scenario = require_scenario();
            const auto file = (fs::path(cfg.out_dir) / ("coverage_" + band.name + ".bin")).string();
            const auto st = cmd_coverage(scenario, band, file, cfg.workers);
            out << "wrote " << file << '\n'
                << "voxels " << st.voxels << " reachable " << st.reachable << '\n'
                << "sinr_db min " << to_shortest(st.min_sinr_db) << " mean " << to_shortest(st.mean_sinr_db) << " max "
                << to_shortest(st.max_sinr_db) << '\n';
        } else if (*planc) {
            const auto& band = single_band();
            if (cfg.planners.size() != 1) throw ConfigError("plan needs exactly one --planner");
            const auto scenario = require_scenario();
            const EndpointPair pair{parse_cell(start_text, "--start"), parse_cell(goal_text, "--goal")};
            cmd_plan(scenario, band, cfg.planners.front(), cfg.astar, pair, out, cfg.workers);
        } else if (*evalc) {
            if (cfg.bands.empty()) cfg.bands = builtin_bands();
            if (cfg.planners.empty()) cfg.planners = all_planners();
            if (seed) cfg.pair_seed = seed;
            if (n_pairs) cfg.n_pairs = n_pairs;
            if (no_cache) cfg.use_cache = false;
            if (cfg.scenario_file.empty() && !cfg.generator) throw ConfigError("no scenario: give --scenario or --config");
            const auto report = cmd_evaluate(cfg);
            out << "planner,band,mean_sinr_db,outage_prob,mean_outage_m,mean_norm_length\n";
            for (const auto& r : report.results) {
                out << r.planner << ',' << r.band << ',' << to_shortest(r.mean_sinr_db) << ','
                    << to_shortest(r.outage_probability) << ','
                    << (r.mean_outage_duration_m ? to_shortest(*r.mean_outage_duration_m) : std::string()) << ','
                    << to_shortest(r.mean_normalized_length) << '\n';
            }
            for (const auto& [band, count] : report.excluded) {
                if (count) err << "warning: " << count << " pairs excluded on band " << band << " (no path)\n";
            }
        } else if (*exp) {
            if (!report_file.empty()) {
                cmd_export_report(report_file, cfg.out_dir);
                out << "wrote plot CSVs to " << cfg.out_dir << '\n';
            } else {
                if (start_text.empty() || goal_text.empty()) {
                    throw ConfigError("export needs --report, or --start and --goal for a profile");
                }
                const auto& band = single_band();
                const auto scenario = require_scenario();
                const EndpointPair pair{parse_cell(start_text, "--start"), parse_cell(goal_text, "--goal")};
                cmd_export_profile(scenario, band, pair, out, cfg.workers);
            }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}

} // namespace uavcov::cli
