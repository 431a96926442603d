#include "flood/experiment.hpp"

#include <cmath>
#include <filesystem>

namespace flood {

namespace {

Hydrograph select_column(const std::vector<Hydrograph>& columns, const std::string& id,
                         const std::string& path) {
    for (const auto& h : columns)
        if (h.boundary_id == id) return h;
    throw validation_error(path + ": no column for boundary '" + id + "'");
}

std::string leg_label(const std::string& dem_type, double resolution) {
    return dem_type + format_double(resolution);
}

}  // namespace

std::vector<std::vector<Hydrograph>> load_training_scenarios(const ExperimentConfig& cfg) {
    std::vector<Hydrograph> bases;
    std::vector<std::vector<double>> peaks;
    for (const auto& b : cfg.boundaries) {
        bases.push_back(select_column(read_hydrograph_csv(b.base_hydrograph_path), b.id, b.base_hydrograph_path));
        peaks.push_back(b.peaks);
    }
    return generate_synthetic_set(bases, peaks, cfg.enforce_main_river_dominance);
}

std::vector<Hydrograph> load_test_hydrographs(const ExperimentConfig& cfg) {
    std::vector<Hydrograph> out;
    for (const auto& b : cfg.boundaries)
        out.push_back(select_column(read_hydrograph_csv(b.test_hydrograph_path), b.id, b.test_hydrograph_path));
    return out;
}

Dataset assemble_dataset(const std::vector<std::vector<Hydrograph>>& scenarios,
                         const std::vector<DepthSeries>& runs, const Grid& dem, int n_ts,
                         double depth_threshold, double output_interval_s, double duration_s) {
    if (scenarios.size() != runs.size())
        throw validation_error("assemble_dataset: scenario and run counts differ");
    if (scenarios.empty()) throw validation_error("assemble_dataset: no scenarios");

    const double dt_hours = output_interval_s / 3600.0;
    const size_t n_points = static_cast<size_t>(std::floor(duration_s / output_interval_s + 1e-9)) + 1;

    Dataset ds;
    ds.cell_index = build_cell_index(dem);
    long row_offset = 0;
    for (size_t k = 0; k < scenarios.size(); ++k) {
        std::vector<Hydrograph> aligned;
        aligned.reserve(scenarios[k].size());
        for (const auto& h : scenarios[k]) aligned.push_back(resample_hydrograph(h, dt_hours, n_points));
        FeatureMatrix fm = build_feature_matrix(aligned, n_ts);
        TargetMatrix tm = build_target_matrix(runs[k], fm.sample_times_hours, dem, depth_threshold);
        if (k == 0) {
            ds.X.resize(fm.X.rows() * static_cast<long>(scenarios.size()), fm.X.cols());
            ds.Y.resize(tm.Y.rows() * static_cast<long>(scenarios.size()), tm.Y.cols());
        }
        if (fm.X.rows() != ds.X.rows() / static_cast<long>(scenarios.size()))
            throw validation_error("assemble_dataset: scenarios produce unequal sample counts");
        ds.X.middleRows(row_offset, fm.X.rows()) = fm.X;
        ds.Y.middleRows(row_offset, tm.Y.rows()) = tm.Y;
        for (double t : fm.sample_times_hours) ds.sample_times_hours.push_back(t);
        row_offset += fm.X.rows();
    }
    ds.norm = fit_normalizer(ds.X);
    return ds;
}

DepthSeries predict_series(SurrogateModel& model, const Matrix& x_normalized,
                           const std::vector<double>& sample_times_hours,
                           const std::vector<CellRef>& cell_index, const Grid& dem,
                           double output_interval_s) {
    if (x_normalized.rows() != static_cast<long>(sample_times_hours.size()))
        throw validation_error("predict_series: row count does not match sample times");
    model.set_mode(Mode::inference);
    Matrix pred = model.forward(x_normalized).cwiseMax(0.0);
    DepthSeries series;
    series.reserve(sample_times_hours.size());
    for (long i = 0; i < pred.rows(); ++i) {
        const double t_seconds = sample_times_hours[static_cast<size_t>(i)] * 3600.0;
        DepthSnapshot snap;
        snap.step = static_cast<int>(std::llround(t_seconds / output_interval_s));
        snap.t = t_seconds;
        snap.depth = scatter_to_grid(pred.row(i), cell_index, dem);
        series.push_back(std::move(snap));
    }
    return series;
}

namespace {

LegResult run_leg(const ExperimentConfig& cfg, const Grid& source_dem, const BuildingSet* buildings,
                  const StationSet* stations, const std::string& dem_type, double resolution) {
    LegResult leg;
    leg.dem_type = dem_type;
    leg.resolution = resolution;
    leg.label = leg_label(dem_type, resolution);
    const std::string leg_dir = cfg.output_dir + "/" + leg.label;
    const std::uint64_t leg_seed = derive_seed(cfg.seed, leg.label);
    const double duration_s = cfg.duration_h * 3600.0;

    std::filesystem::create_directories(leg_dir);
    log_info("leg " + leg.label + ": building DEM variant");

    Grid dem = resample_bilinear(source_dem, resolution);
    if (dem_type == "DSM") {
        if (!buildings) throw validation_error("DSM leg without building footprints");
        dem = burn_buildings(dem, *buildings);
    }
    write_ascii_grid(dem, leg_dir + "/dem.asc");

    // Training scenario runs.
    const auto scenarios = load_training_scenarios(cfg);
    std::vector<DepthSeries> runs;
    runs.reserve(scenarios.size());
    for (size_t k = 0; k < scenarios.size(); ++k) {
        std::vector<BoundaryLocation> locations;
        for (const auto& b : cfg.boundaries) locations.push_back({b.id, b.x, b.y});
        const BoundarySet bset = bind_boundaries(dem, locations, scenarios[k]);
        log_info("leg " + leg.label + ": simulating training scenario " + std::to_string(k + 1) + "/" +
                 std::to_string(scenarios.size()));
        std::vector<MassBalanceRow> ledger;
        DepthSeries series = simulate(dem, bset, cfg.solver, duration_s, &ledger);
        write_depth_series(series, ledger, leg_dir + "/runs/train_" + std::to_string(k + 1));
        runs.push_back(std::move(series));
    }

    // Held-out event run (the evaluation baseline at this leg's own DEM).
    const auto test_hydrographs = load_test_hydrographs(cfg);
    std::vector<BoundaryLocation> locations;
    for (const auto& b : cfg.boundaries) locations.push_back({b.id, b.x, b.y});
    const BoundarySet test_bset = bind_boundaries(dem, locations, test_hydrographs);
    log_info("leg " + leg.label + ": simulating held-out event");
    std::vector<MassBalanceRow> test_ledger;
    DepthSeries obs_series = simulate(dem, test_bset, cfg.solver, duration_s, &test_ledger);
    write_depth_series(obs_series, test_ledger, leg_dir + "/runs/test");

    // Dataset assembly and normalization.
    Dataset ds = assemble_dataset(scenarios, runs, dem, cfg.n_ts, cfg.wet_threshold,
                                  cfg.solver.output_interval, duration_s);
    save_dataset(ds, leg_dir + "/dataset");
    const Matrix x_train = apply_normalizer(ds.norm, ds.X);

    // Train the surrogate for this DEM variant.
    Architecture arch;
    arch.n_features = static_cast<int>(ds.X.cols());
    arch.n_cells = static_cast<int>(ds.Y.cols());
    arch.dropout_p = cfg.train.dropout_p;
    SurrogateModel model(arch, derive_seed(leg_seed, "init"));
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(leg_seed, "train");
    log_info("leg " + leg.label + ": training surrogate (" + std::to_string(ds.X.rows()) + " samples, " +
             std::to_string(ds.Y.cols()) + " cells)");
    const auto history = train_model(model, x_train, ds.Y, tc);
    write_history_csv(history, leg_dir + "/history.csv");
    model.norm = ds.norm;
    save_model(model, leg_dir + "/model.bin");

    // Predict the held-out event.
    const double dt_hours = cfg.solver.output_interval / 3600.0;
    const size_t n_points = static_cast<size_t>(std::floor(duration_s / cfg.solver.output_interval + 1e-9)) + 1;
    std::vector<Hydrograph> test_aligned;
    for (const auto& h : test_hydrographs) test_aligned.push_back(resample_hydrograph(h, dt_hours, n_points));
    FeatureMatrix test_fm = build_feature_matrix(test_aligned, cfg.n_ts);
    const Matrix x_test = apply_normalizer(ds.norm, test_fm.X);
    DepthSeries pred_series = predict_series(model, x_test, test_fm.sample_times_hours, ds.cell_index, dem,
                                             cfg.solver.output_interval);
    write_depth_series(pred_series, {}, leg_dir + "/pred");

    // Metrics against the solver baseline.
    leg.report = stage_report(obs_series, pred_series, cfg.stages, cfg.wet_threshold, nullptr);
    leg.report.dem_label = leg.label;
    leg.report.dem_type = dem_type;
    leg.report.resolution_m = resolution;
    write_report_csv(leg.report, leg_dir + "/report.csv");
    write_error_maps(obs_series, pred_series, cfg.stages, leg_dir);
    if (stations) {
        write_station_series(obs_series, pred_series, cfg.stages, *stations,
                             leg_dir + "/stations_" + leg.label + ".csv");
        MetricsReport station_report = stage_report(obs_series, pred_series, cfg.stages, cfg.wet_threshold,
                                                    stations);
        station_report.dem_label = leg.label;
        station_report.dem_type = dem_type;
        station_report.resolution_m = resolution;
        write_report_csv(station_report, leg_dir + "/report_stations.csv");
    }
    leg.ok = true;
    return leg;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    write_text_file(cfg.output_dir + "/config.echo", experiment_config_echo(cfg));

    const Grid source_dem = read_ascii_grid(cfg.dem_path);
    std::optional<BuildingSet> buildings;
    if (!cfg.buildings_path.empty())
        buildings = read_building_file(cfg.buildings_path, cfg.burn_height_m);
    std::optional<StationSet> stations;
    if (!cfg.stations_path.empty()) stations = read_station_csv(cfg.stations_path);

    ExperimentResult result;
    for (const auto& dem_type : cfg.dem_types) {
        for (double resolution : cfg.resolutions) {
            LegResult leg;
            try {
                leg = run_leg(cfg, source_dem, buildings ? &*buildings : nullptr,
                              stations ? &*stations : nullptr, dem_type, resolution);
            } catch (const std::exception& e) {
                leg.dem_type = dem_type;
                leg.resolution = resolution;
                leg.label = leg_label(dem_type, resolution);
                leg.ok = false;
                leg.error = e.what();
                log_info("leg " + leg.label + " FAILED: " + leg.error);
            }
            result.legs.push_back(std::move(leg));
        }
    }

    std::string summary = std::string(kReportHeader) + "\n";
    std::string failures = "leg,error\n";
    bool any_failures = false;
    for (const auto& leg : result.legs) {
        if (leg.ok) {
            summary += report_to_csv(leg.report, false);
        } else {
            any_failures = true;
            std::string msg = leg.error;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            failures += leg.label + "," + msg + "\n";
        }
    }
    result.summary_path = cfg.output_dir + "/summary.csv";
    write_text_file(result.summary_path, summary);
    if (any_failures) write_text_file(cfg.output_dir + "/failures.csv", failures);
    return result;
}

}  // namespace flood
