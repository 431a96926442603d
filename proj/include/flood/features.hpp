#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "flood/hydrograph.hpp"
#include "flood/solver.hpp"

namespace flood {

using Matrix = Eigen::MatrixXd;

struct CellRef {
    int row = 0;
    int col = 0;
};

// Per-feature normalization statistics fitted on training X.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std;  // population std; entries < 1e-12 pass through
};

// Paired feature/target matrices per Table-style layout: X row =
// [t_hours, per boundary (q_t, q_{t-1}, ..., q_{t-n_ts})], Y row = per-cell
// depth over the non-NODATA cells of the DEM in row-major order.
struct Dataset {
    Matrix X;
    Matrix Y;
    std::vector<CellRef> cell_index;
    Normalizer norm;
    std::vector<double> sample_times_hours;  // one per row
};

struct FeatureMatrix {
    Matrix X;
    std::vector<double> sample_times_hours;
};

// One sample per time index i in [n_ts, len); hydrographs must share t0 and
// dt; columns ordered [t, b0: q_i..q_{i-n_ts}, b1: ...].
FeatureMatrix build_feature_matrix(const std::vector<Hydrograph>& hydrographs, int n_ts);

struct TargetMatrix {
    Matrix Y;
    std::vector<CellRef> cell_index;
};

// Row per sample time (snapshots matched exactly on the output cadence),
// column per non-NODATA cell; depths below depth_threshold are zeroed.
TargetMatrix build_target_matrix(const DepthSeries& series, const std::vector<double>& sample_times_hours,
                                 const Grid& dem, double depth_threshold);

// Deterministic row-major enumeration of the non-NODATA cells.
std::vector<CellRef> build_cell_index(const Grid& dem);

Normalizer fit_normalizer(const Matrix& train_x);
Matrix apply_normalizer(const Normalizer& norm, const Matrix& x);

// Scatters one Y row back onto the grid (NODATA elsewhere).
Grid scatter_to_grid(const Eigen::VectorXd& row, const std::vector<CellRef>& cell_index, const Grid& dem);

// Dataset directory: X.csv, Y.bin (header + row-major little-endian f64),
// cell_index.csv, norm.csv, times.csv.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace flood
