#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "flood/experiment.hpp"

using namespace flood;

namespace {

namespace fs = std::filesystem;

// Small V-valley scene: 16x16 at 20 m, one boundary, two training peaks, the
// held-out event identical to training scenario 0 (identity scaling).
std::string write_tiny_scene(const std::string& name, const std::string& extra_top = "",
                             const std::string& resolutions = "20") {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);

    Grid dem = make_grid(16, 16, 0, 0, 20.0);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c)
            dem.at(r, c) = 0.05 * std::abs(dem.cell_center_x(c) - 160.0) + 0.005 * dem.cell_center_y(r);
    write_ascii_grid(dem, (dir / "dem.asc").string());

    write_text_file((dir / "buildings.txt").string(), "100 100, 140 100, 140 140, 100 140, 100 100\n");
    write_text_file((dir / "stations.csv").string(), "name,x,y\nmid,150,150\nlow,150,50\n");

    // gamma-shaped inflow rising smoothly from zero, peak 30 m^3/s at 2 h
    std::string hydro = "t_hours,up1\n";
    for (int i = 0; i <= 16; ++i) {
        const double t = 0.25 * i;
        const double x = t / 2.0;
        const double q = (t <= 0) ? 0.0 : 30.0 * std::pow(x * std::exp(1.0 - x), 4.0);
        hydro += format_double(t) + "," + format_double(q) + "\n";
    }
    write_text_file((dir / "base.csv").string(), hydro);

    std::string config;
    config += "dem_path = dem.asc\n";
    config += "buildings_path = buildings.txt\n";
    config += "burn_height_m = 4\n";
    config += "resolutions = " + resolutions + "\n";
    config += "dem_types = DTM\n";
    config += "output_dir = " + (dir / "out").string() + "\n";
    config += "seed = 77\n";
    config += extra_top;
    config += "\n[solver]\noutput_interval_s = 900\nduration_h = 4\n";
    config += "\n[surrogate]\nn_ts = 2\nlearning_rate = 0.004\nbatch_size = 8\ndropout_p = 0\n";
    config += "patience = 30\nmin_delta = 1e-9\nmax_epochs = 40\nval_fraction = 0.15\n";
    config += "\n[eval]\nstages = 4,8,12,16\nwet_threshold = 0.3\nstations_path = stations.csv\n";
    config += "\n[boundary.up1]\nx = 150\ny = 290\nbase_hydrograph = base.csv\n";
    config += "peaks = 30,45\ntest_hydrograph = base.csv\n";
    write_text_file((dir / "config.ini").string(), config);
    return (dir / "config.ini").string();
}

}  // namespace

TEST_CASE("config files parse with paths resolved against the config directory") {
    const std::string path = write_tiny_scene("flood_cfg_scene");
    ExperimentConfig cfg = load_experiment_config(path);
    CHECK(fs::path(cfg.dem_path).is_absolute());
    CHECK(fs::exists(cfg.dem_path));
    CHECK(cfg.resolutions == std::vector<double>{20.0});
    CHECK(cfg.dem_types == std::vector<std::string>{"DTM"});
    CHECK(cfg.solver.output_interval == 900.0);
    CHECK(cfg.duration_h == 4.0);
    CHECK(cfg.n_ts == 2);
    CHECK(cfg.train.batch_size == 8);
    CHECK(cfg.train.seed == 77);
    CHECK(cfg.stages == std::vector<int>{4, 8, 12, 16});
    REQUIRE(cfg.boundaries.size() == 1);
    CHECK(cfg.boundaries[0].id == "up1");
    CHECK(cfg.boundaries[0].peaks == std::vector<double>{30.0, 45.0});
}

TEST_CASE("config echo is a fixed point of the parser") {
    const std::string path = write_tiny_scene("flood_cfg_echo");
    ExperimentConfig cfg = load_experiment_config(path);
    const std::string echo1 = experiment_config_echo(cfg);
    ExperimentConfig cfg2 = parse_experiment_config(echo1, "echo", ".");
    CHECK(experiment_config_echo(cfg2) == echo1);
}

TEST_CASE("config validation rejects inconsistent experiments") {
    const std::string path = write_tiny_scene("flood_cfg_bad");
    ExperimentConfig cfg = load_experiment_config(path);

    ExperimentConfig no_res = cfg;
    no_res.resolutions.clear();
    CHECK_THROWS_AS(no_res.validate(), validation_error);

    ExperimentConfig bad_type = cfg;
    bad_type.dem_types = {"DEM"};
    CHECK_THROWS_AS(bad_type.validate(), validation_error);

    ExperimentConfig dsm_nobuildings = cfg;
    dsm_nobuildings.dem_types = {"DSM"};
    dsm_nobuildings.buildings_path.clear();
    CHECK_THROWS_AS(dsm_nobuildings.validate(), validation_error);

    ExperimentConfig short_run = cfg;
    short_run.duration_h = 1.0;  // does not cover stage 16
    CHECK_THROWS_AS(short_run.validate(), validation_error);

    CHECK_THROWS_AS(parse_experiment_config("nonsense_key = 3\n", "t", "."), parse_error);
}

TEST_CASE("a full leg memorizes the held-out event that equals a training scenario") {
    const std::string path = write_tiny_scene("flood_tiny_leg");
    ExperimentConfig cfg = load_experiment_config(path);
    ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.legs.size() == 1);
    REQUIRE(result.legs[0].ok);
    const auto& report = result.legs[0].report;
    REQUIRE(report.records.size() == 4);
    // the 8th step sits near peak flow; memorized scenario must be tight
    for (const auto& rec : report.records) {
        if (rec.step == 8) {
            CHECK(rec.rmse_m <= 0.15);
            CHECK(rec.scores.f1 >= 0.7);
        }
    }
    // artifacts in the documented layout
    const std::string leg = cfg.output_dir + "/DTM20";
    for (const char* name :
         {"/dem.asc", "/runs/train_1/series.csv", "/runs/train_2/series.csv", "/runs/test/series.csv",
          "/dataset/X.csv", "/dataset/Y.bin", "/model.bin", "/history.csv", "/pred/series.csv",
          "/report.csv", "/err_8.asc", "/stations_DTM20.csv", "/report_stations.csv"})
        CHECK(fs::exists(leg + name));
    CHECK(fs::exists(cfg.output_dir + "/summary.csv"));
    CHECK(fs::exists(cfg.output_dir + "/config.echo"));
}

TEST_CASE("reruns with the same seed are byte-identical") {
    const std::string path = write_tiny_scene("flood_tiny_det");
    ExperimentConfig cfg = load_experiment_config(path);
    ExperimentConfig cfg2 = cfg;
    cfg2.output_dir = cfg.output_dir + "_rerun";
    run_experiment(cfg);
    run_experiment(cfg2);
    CHECK(read_text_file(cfg.output_dir + "/summary.csv") ==
          read_text_file(cfg2.output_dir + "/summary.csv"));
    CHECK(read_text_file(cfg.output_dir + "/DTM20/report.csv") ==
          read_text_file(cfg2.output_dir + "/DTM20/report.csv"));
    CHECK(read_text_file(cfg.output_dir + "/DTM20/history.csv") ==
          read_text_file(cfg2.output_dir + "/DTM20/history.csv"));
}

TEST_CASE("a failing leg is recorded and never disturbs the healthy legs") {
    // resolution 5 m < the 20 m source: that leg must refuse, DTM20 must run
    const std::string path = write_tiny_scene("flood_leg_iso", "", "20,5");
    ExperimentConfig cfg = load_experiment_config(path);
    ExperimentResult result = run_experiment(cfg);
    REQUIRE(result.legs.size() == 2);
    CHECK(result.legs[0].ok);
    CHECK(!result.legs[1].ok);
    CHECK(result.legs[1].label == "DTM5");
    CHECK(fs::exists(cfg.output_dir + "/failures.csv"));
    const std::string failures = read_text_file(cfg.output_dir + "/failures.csv");
    CHECK(failures.find("DTM5") != std::string::npos);
    const std::string summary = read_text_file(cfg.output_dir + "/summary.csv");
    CHECK(summary.find("DTM5") == std::string::npos);
    CHECK(summary.find("DTM20") != std::string::npos);

    // healthy-leg outputs equal the single-leg run bit for bit
    const std::string solo_path = write_tiny_scene("flood_leg_solo");
    ExperimentConfig solo = load_experiment_config(solo_path);
    run_experiment(solo);
    CHECK(read_text_file(cfg.output_dir + "/DTM20/report.csv") ==
          read_text_file(solo.output_dir + "/DTM20/report.csv"));
    CHECK(read_text_file(cfg.output_dir + "/DTM20/history.csv") ==
          read_text_file(solo.output_dir + "/DTM20/history.csv"));
}

TEST_CASE("training scenarios honor the dominance flag through the config") {
    const std::string path = write_tiny_scene("flood_dom");
    ExperimentConfig cfg = load_experiment_config(path);
    cfg.enforce_main_river_dominance = true;  // single boundary: trivially satisfied
    auto scenarios = load_training_scenarios(cfg);
    CHECK(scenarios.size() == 2);
    CHECK(scenarios[0].size() == 1);
    CHECK(scenarios[1][0].peak() == doctest::Approx(45.0));
}
