// flood: config-driven flood-surrogate experiments plus per-stage subcommands
// (DEM variants, synthetic hydrographs, solver runs, dataset assembly,
// training, prediction, evaluation).

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <map>

#include "flood/experiment.hpp"

namespace {

using namespace flood;

std::vector<double> split_doubles(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split(csv, ','))
        if (!trim(tok).empty()) out.push_back(parse_double(trim(tok), what));
    return out;
}

std::vector<int> split_ints(const std::string& csv, const std::string& what) {
    std::vector<int> out;
    for (const auto& tok : split(csv, ','))
        if (!trim(tok).empty()) out.push_back(static_cast<int>(parse_long(trim(tok), what)));
    return out;
}

// "<key>=<value>" pairs used by --peaks and --scenario flags.
std::pair<std::string, std::string> split_kv(const std::string& s, const std::string& flag) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw validation_error(flag + " expects <key>=<value>, got '" + s + "'");
    return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

int cmd_dem_resample(const std::string& in, double cellsize, const std::string& out) {
    write_ascii_grid(resample_bilinear(read_ascii_grid(in), cellsize), out);
    return 0;
}

int cmd_dem_burn(const std::string& in, const std::string& buildings_path, double height,
                 const std::string& out) {
    const Grid dtm = read_ascii_grid(in);
    const BuildingSet buildings = read_building_file(buildings_path, height);
    write_ascii_grid(burn_buildings(dtm, buildings), out);
    return 0;
}

int cmd_hydrograph_synth(const std::string& in, const std::vector<std::string>& peak_args,
                         bool enforce_dominance, const std::string& out_dir) {
    const auto columns = read_hydrograph_csv(in);
    std::vector<Hydrograph> bases;
    std::vector<std::vector<double>> peaks;
    for (const auto& arg : peak_args) {
        auto [id, list] = split_kv(arg, "--peaks");
        auto it = std::find_if(columns.begin(), columns.end(),
                               [&](const Hydrograph& h) { return h.boundary_id == id; });
        if (it == columns.end()) throw validation_error(in + ": no column for boundary '" + id + "'");
        bases.push_back(*it);
        peaks.push_back(split_doubles(list, "peaks"));
    }
    const auto scenarios = generate_synthetic_set(bases, peaks, enforce_dominance);
    std::filesystem::create_directories(out_dir);
    for (size_t k = 0; k < scenarios.size(); ++k)
        write_hydrograph_csv(scenarios[k], out_dir + "/synth_" + std::to_string(k + 1) + ".csv");
    std::printf("wrote %zu scenario files to %s\n", scenarios.size(), out_dir.c_str());
    return 0;
}

int cmd_simulate(const std::string& dem_path, const std::string& hydrograph_path,
                 const std::vector<std::string>& boundary_args, const SolverConfig& scfg, double duration_h,
                 const std::string& out_dir) {
    const Grid dem = read_ascii_grid(dem_path);
    const auto hydrographs = read_hydrograph_csv(hydrograph_path);
    std::vector<BoundaryLocation> locations;
    for (const auto& arg : boundary_args) {
        auto [id, xy] = split_kv(arg, "--boundary");
        const auto coords = split_doubles(xy, "boundary x,y");
        if (coords.size() != 2) throw validation_error("--boundary expects <id>=<x>,<y>");
        locations.push_back({id, coords[0], coords[1]});
    }
    const BoundarySet bset = bind_boundaries(dem, locations, hydrographs);
    std::vector<MassBalanceRow> ledger;
    const DepthSeries series = simulate(dem, bset, scfg, duration_h * 3600.0, &ledger);
    write_depth_series(series, ledger, out_dir);
    std::printf("wrote %zu snapshots to %s\n", series.size(), out_dir.c_str());
    return 0;
}

int cmd_dataset_build(const std::string& dem_path, const std::vector<std::string>& scenario_args, int n_ts,
                      double threshold, double output_interval_s, double duration_h, const std::string& out_dir) {
    const Grid dem = read_ascii_grid(dem_path);
    std::vector<std::vector<Hydrograph>> scenarios;
    std::vector<DepthSeries> runs;
    for (const auto& arg : scenario_args) {
        auto [csv, run_dir] = split_kv(arg, "--scenario");
        scenarios.push_back(read_hydrograph_csv(csv));
        runs.push_back(read_depth_series(run_dir));
    }
    const Dataset ds =
        assemble_dataset(scenarios, runs, dem, n_ts, threshold, output_interval_s, duration_h * 3600.0);
    save_dataset(ds, out_dir);
    std::printf("dataset: %ld samples x %ld features, %ld target cells -> %s\n",
                static_cast<long>(ds.X.rows()), static_cast<long>(ds.X.cols()),
                static_cast<long>(ds.Y.cols()), out_dir.c_str());
    return 0;
}

int cmd_train(const std::string& dataset_dir, const TrainConfig& tc, const std::string& model_path,
              const std::string& history_path) {
    const Dataset ds = load_dataset(dataset_dir);
    Architecture arch;
    arch.n_features = static_cast<int>(ds.X.cols());
    arch.n_cells = static_cast<int>(ds.Y.cols());
    arch.dropout_p = tc.dropout_p;
    SurrogateModel model(arch, derive_seed(tc.seed, "init"));
    const Matrix x = apply_normalizer(ds.norm, ds.X);
    const auto history = train_model(model, x, ds.Y, tc);
    model.norm = ds.norm;
    save_model(model, model_path);
    if (!history_path.empty()) write_history_csv(history, history_path);
    std::printf("trained %d epochs, final val loss %s -> %s\n", static_cast<int>(history.size()),
                format_double(history.empty() ? 0.0 : history.back().val_loss).c_str(), model_path.c_str());
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& hydrograph_path, const std::string& dem_path,
                int n_ts, double output_interval_s, double duration_h, const std::string& out_dir) {
    SurrogateModel model = load_model(model_path);
    const Grid dem = read_ascii_grid(dem_path);
    const auto hydrographs = read_hydrograph_csv(hydrograph_path);
    const double dt_hours = output_interval_s / 3600.0;
    const size_t n_points =
        static_cast<size_t>(std::floor(duration_h * 3600.0 / output_interval_s + 1e-9)) + 1;
    std::vector<Hydrograph> aligned;
    for (const auto& h : hydrographs) aligned.push_back(resample_hydrograph(h, dt_hours, n_points));
    const FeatureMatrix fm = build_feature_matrix(aligned, n_ts);
    const Matrix x = apply_normalizer(model.norm, fm.X);
    const std::vector<CellRef> cell_index = build_cell_index(dem);
    const DepthSeries series =
        predict_series(model, x, fm.sample_times_hours, cell_index, dem, output_interval_s);
    write_depth_series(series, {}, out_dir);
    std::printf("wrote %zu predicted grids to %s\n", series.size(), out_dir.c_str());
    return 0;
}

int cmd_evaluate(const std::string& obs_dir, const std::string& sim_dir, const std::string& stages_csv,
                 double wet_threshold, const std::string& stations_path, const std::string& label,
                 const std::string& dem_type, double resolution, const std::string& report_path,
                 const std::string& error_map_dir) {
    const DepthSeries obs = read_depth_series(obs_dir);
    const DepthSeries sim = read_depth_series(sim_dir);
    const std::vector<int> stages = split_ints(stages_csv, "stages");
    std::optional<StationSet> stations;
    if (!stations_path.empty()) stations = read_station_csv(stations_path);
    MetricsReport report = stage_report(obs, sim, stages, wet_threshold, stations ? &*stations : nullptr);
    report.dem_label = label;
    report.dem_type = dem_type;
    report.resolution_m = resolution;
    write_report_csv(report, report_path);
    if (!error_map_dir.empty()) write_error_maps(obs, sim, stages, error_map_dir);
    if (stations)
        write_station_series(obs, sim, stages, *stations,
                             std::filesystem::path(report_path).parent_path() /
                                 ("stations_" + (label.empty() ? std::string("report") : label) + ".csv"));
    std::printf("wrote %s\n", report_path.c_str());
    return 0;
}

int cmd_report(const std::vector<std::string>& leg_reports, const std::string& out_path) {
    std::string merged = std::string(kReportHeader) + "\n";
    for (const auto& path : leg_reports) {
        std::istringstream in(read_text_file(path));
        std::string line;
        if (!std::getline(in, line) || trim(line) != kReportHeader)
            throw parse_error(path + ": unexpected report header");
        while (std::getline(in, line))
            if (!trim(line).empty()) merged += trim(line) + "\n";
    }
    write_text_file(out_path, merged);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_run(const std::string& config_path) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const ExperimentResult result = run_experiment(cfg);
    int failed = 0;
    for (const auto& leg : result.legs) {
        std::printf("%s: %s\n", leg.label.c_str(), leg.ok ? "ok" : ("FAILED: " + leg.error).c_str());
        if (!leg.ok) ++failed;
    }
    std::printf("summary: %s\n", result.summary_path.c_str());
    if (failed) {
        std::fprintf(stderr, "error[data]: %d experiment leg(s) failed\n", failed);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flood: raster flood solver, CNN surrogate and evaluation toolkit"};
    app.require_subcommand(1);

    // dem
    auto* dem = app.add_subcommand("dem", "DEM variant construction");
    dem->require_subcommand(1);
    std::string dem_in, dem_out, buildings_path;
    double target_cellsize = 0.0, burn_height = 0.0;
    auto* dem_resample = dem->add_subcommand("resample", "bilinear coarsening to a target cellsize");
    dem_resample->add_option("--in", dem_in)->required();
    dem_resample->add_option("--cellsize", target_cellsize)->required();
    dem_resample->add_option("--out", dem_out)->required();
    auto* dem_burn = dem->add_subcommand("burn", "burn building footprints (DTM -> DSM)");
    dem_burn->add_option("--in", dem_in)->required();
    dem_burn->add_option("--buildings", buildings_path)->required();
    dem_burn->add_option("--height", burn_height)->required();
    dem_burn->add_option("--out", dem_out)->required();

    // hydrograph synth
    auto* hydro = app.add_subcommand("hydrograph", "hydrograph utilities");
    hydro->require_subcommand(1);
    std::string hydro_in, hydro_out;
    std::vector<std::string> peak_args;
    bool enforce_dominance = false;
    auto* hydro_synth = hydro->add_subcommand("synth", "scale base hydrographs to Peak_max lists");
    hydro_synth->add_option("--in", hydro_in)->required();
    hydro_synth->add_option("--peaks", peak_args, "<boundary>=<p1,p2,...> (repeatable)")->required();
    hydro_synth->add_flag("--enforce-dominance", enforce_dominance);
    hydro_synth->add_option("--out", hydro_out)->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the inertial solver over one hydrograph set");
    std::string sim_dem, sim_hydro, sim_out;
    std::vector<std::string> boundary_args;
    SolverConfig scfg;
    double duration_h = 48.0;
    sim->add_option("--dem", sim_dem)->required();
    sim->add_option("--hydrograph", sim_hydro)->required();
    sim->add_option("--boundary", boundary_args, "<id>=<x>,<y> (repeatable)")->required();
    sim->add_option("--manning", scfg.manning_n);
    sim->add_option("--alpha", scfg.alpha);
    sim->add_option("--dt-max", scfg.dt_max);
    sim->add_option("--h-wet", scfg.h_wet);
    sim->add_option("--output-interval", scfg.output_interval);
    sim->add_option("--duration-h", duration_h);
    sim->add_option("--out", sim_out)->required();

    // dataset build
    auto* dataset = app.add_subcommand("dataset", "dataset assembly");
    dataset->require_subcommand(1);
    std::string ds_dem, ds_out;
    std::vector<std::string> scenario_args;
    int n_ts = 8;
    double threshold = 0.3, ds_interval = 900.0, ds_duration_h = 48.0;
    auto* ds_build = dataset->add_subcommand("build", "stack feature/target matrices from solver runs");
    ds_build->add_option("--dem", ds_dem)->required();
    ds_build->add_option("--scenario", scenario_args, "<hydrograph.csv>=<run_dir> (repeatable)")->required();
    ds_build->add_option("--n-ts", n_ts);
    ds_build->add_option("--threshold", threshold);
    ds_build->add_option("--output-interval", ds_interval);
    ds_build->add_option("--duration-h", ds_duration_h);
    ds_build->add_option("--out", ds_out)->required();

    // train
    auto* train = app.add_subcommand("train", "train the 1D CNN surrogate on a dataset");
    std::string train_dataset, train_model_path, train_history = "";
    TrainConfig tc;
    long train_seed = 0;
    train->add_option("--dataset", train_dataset)->required();
    train->add_option("--lr", tc.learning_rate);
    train->add_option("--batch", tc.batch_size);
    train->add_option("--dropout", tc.dropout_p);
    train->add_option("--patience", tc.patience);
    train->add_option("--min-delta", tc.min_delta);
    train->add_option("--epochs", tc.max_epochs);
    train->add_option("--val-fraction", tc.val_fraction);
    train->add_option("--seed", train_seed);
    train->add_option("--out", train_model_path)->required();
    train->add_option("--history", train_history);

    // predict
    auto* predict = app.add_subcommand("predict", "surrogate depth grids for a hydrograph set");
    std::string pr_model, pr_hydro, pr_dem, pr_out;
    int pr_nts = 8;
    double pr_interval = 900.0, pr_duration_h = 48.0;
    predict->add_option("--model", pr_model)->required();
    predict->add_option("--hydrograph", pr_hydro)->required();
    predict->add_option("--dem", pr_dem)->required();
    predict->add_option("--n-ts", pr_nts);
    predict->add_option("--output-interval", pr_interval);
    predict->add_option("--duration-h", pr_duration_h);
    predict->add_option("--out", pr_out)->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "depth and extent metrics for obs vs sim runs");
    std::string ev_obs, ev_sim, ev_stages = "48,96,144,192", ev_stations, ev_label, ev_type = "DTM";
    std::string ev_report = "report.csv", ev_errmaps;
    double ev_threshold = 0.3, ev_resolution = 0.0;
    evaluate->add_option("--obs", ev_obs)->required();
    evaluate->add_option("--sim", ev_sim)->required();
    evaluate->add_option("--stages", ev_stages);
    evaluate->add_option("--wet-threshold", ev_threshold);
    evaluate->add_option("--stations", ev_stations);
    evaluate->add_option("--label", ev_label);
    evaluate->add_option("--dem-type", ev_type);
    evaluate->add_option("--resolution", ev_resolution);
    evaluate->add_option("--out", ev_report);
    evaluate->add_option("--error-maps", ev_errmaps);

    // report
    auto* report = app.add_subcommand("report", "merge per-leg reports into one summary");
    std::vector<std::string> report_legs;
    std::string report_out = "summary.csv";
    report->add_option("--legs", report_legs, "report.csv paths (repeatable)")->required();
    report->add_option("--out", report_out);

    // run
    auto* run = app.add_subcommand("run", "run the full experiment from a config file");
    std::string run_config;
    run->add_option("--config", run_config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
    }

    try {
        if (dem_resample->parsed()) return cmd_dem_resample(dem_in, target_cellsize, dem_out);
        if (dem_burn->parsed()) return cmd_dem_burn(dem_in, buildings_path, burn_height, dem_out);
        if (hydro_synth->parsed()) return cmd_hydrograph_synth(hydro_in, peak_args, enforce_dominance, hydro_out);
        if (sim->parsed()) return cmd_simulate(sim_dem, sim_hydro, boundary_args, scfg, duration_h, sim_out);
        if (ds_build->parsed())
            return cmd_dataset_build(ds_dem, scenario_args, n_ts, threshold, ds_interval, ds_duration_h, ds_out);
        if (train->parsed()) {
            tc.seed = static_cast<std::uint64_t>(train_seed);
            return cmd_train(train_dataset, tc, train_model_path, train_history);
        }
        if (predict->parsed())
            return cmd_predict(pr_model, pr_hydro, pr_dem, pr_nts, pr_interval, pr_duration_h, pr_out);
        if (evaluate->parsed())
            return cmd_evaluate(ev_obs, ev_sim, ev_stages, ev_threshold, ev_stations, ev_label, ev_type,
                                ev_resolution, ev_report, ev_errmaps);
        if (report->parsed()) return cmd_report(report_legs, report_out);
        if (run->parsed()) return cmd_run(run_config);
    } catch (const flood::numerical_error& e) {
        std::fprintf(stderr, "error[numerical]: %s\n", e.what());
        return 3;
    } catch (const flood::error& e) {
        std::fprintf(stderr, "error[data]: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 2;
    }
    return 1;
}
