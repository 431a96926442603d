#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flood/solver.hpp"
#include "flood/surrogate.hpp"

namespace flood {

struct BoundaryConfig {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::string base_hydrograph_path;
    std::vector<double> peaks;  // Peak_max per training scenario
    std::string test_hydrograph_path;
};

// Machine-readable form of the whole experiment: DEM variants, solver runs,
// dataset assembly, training, prediction and reports.
struct ExperimentConfig {
    std::string dem_path;
    std::string buildings_path;  // optional; required when DSM is requested
    double burn_height_m = 0.0;
    std::vector<double> resolutions;      // target cellsizes (m)
    std::vector<std::string> dem_types;   // subset of {DTM, DSM}
    std::vector<BoundaryConfig> boundaries;
    bool enforce_main_river_dominance = false;

    SolverConfig solver;
    double duration_h = 48.0;

    int n_ts = 8;
    TrainConfig train;

    std::vector<int> stages{48, 96, 144, 192};
    double wet_threshold = 0.3;
    std::string stations_path;  // optional

    std::string output_dir;
    std::uint64_t seed = 0;

    void validate() const;
};

// Key/value text file with [section] headers; boundary sections are
// [boundary.<id>]. Relative paths resolve against the config file directory.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin,
                                         const std::string& base_dir);

// Canonical re-serialization (the config.echo artifact).
std::string experiment_config_echo(const ExperimentConfig& cfg);

}  // namespace flood
