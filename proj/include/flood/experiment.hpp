#pragma once

#include <string>
#include <vector>

#include "flood/config.hpp"
#include "flood/eval.hpp"

namespace flood {

struct LegResult {
    std::string label;      // e.g. DTM10
    std::string dem_type;
    double resolution = 0.0;
    bool ok = false;
    std::string error;      // set when !ok
    MetricsReport report;
};

struct ExperimentResult {
    std::vector<LegResult> legs;
    std::string summary_path;
};

// One leg per (dem_type, resolution): DEM variant -> training + test solver
// runs -> dataset -> training -> prediction -> report. A failing leg is
// recorded and the remaining legs still run. Every random draw descends from
// the config seed, so reruns are byte-identical.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Builds the per-scenario boundary hydrograph sets from the config (base
// hydrographs scaled to the per-boundary Peak_max lists).
std::vector<std::vector<Hydrograph>> load_training_scenarios(const ExperimentConfig& cfg);
std::vector<Hydrograph> load_test_hydrographs(const ExperimentConfig& cfg);

// Assembles the stacked dataset for a set of scenarios already simulated.
Dataset assemble_dataset(const std::vector<std::vector<Hydrograph>>& scenarios,
                         const std::vector<DepthSeries>& runs, const Grid& dem, int n_ts,
                         double depth_threshold, double output_interval_s, double duration_s);

// Prediction series: inference forward, negatives clamped to 0, rows
// scattered onto the grid via the cell index.
DepthSeries predict_series(SurrogateModel& model, const Matrix& x_normalized,
                           const std::vector<double>& sample_times_hours,
                           const std::vector<CellRef>& cell_index, const Grid& dem,
                           double output_interval_s);

}  // namespace flood
