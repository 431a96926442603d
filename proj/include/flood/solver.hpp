#pragma once

#include <string>
#include <vector>

#include "flood/hydrograph.hpp"
#include "flood/raster.hpp"

namespace flood {

inline constexpr double kGravity = 9.80665;  // m/s^2

struct SolverConfig {
    double manning_n = 0.055;       // s m^(-1/3)
    double alpha = 0.7;             // CFL safety factor, (0, 1]
    double dt_max = 10.0;           // s
    double h_wet = 1e-3;            // wet/dry flux threshold (m)
    double output_interval = 900.0; // s

    void validate() const;
};

// Depths plus staggered face fluxes over one DEM. Unit-width discharges
// (m^2/s): qx has ncols+1 entries per row, qx(r,i) crossing the face between
// cells (r,i-1) and (r,i), positive eastward; qy has nrows+1 rows, qy(j,c)
// crossing the face between rows j-1 and j, positive southward. Face 0 and
// the last face of each line are the domain edges.
struct SolverState {
    Grid dem;
    Grid h;  // water depth (m), aligned with dem, 0 on NODATA cells
    std::vector<double> qx;  // nrows * (ncols+1)
    std::vector<double> qy;  // (nrows+1) * ncols
    double t = 0.0;          // s since start
    double inflow_volume = 0.0;      // m^3, cumulative
    double outflow_volume = 0.0;     // m^3, cumulative
    double clamp_correction = 0.0;   // m^3 of depth clamped back to zero

    double& qx_at(int r, int i) { return qx[static_cast<size_t>(r) * (dem.ncols + 1) + i]; }
    double qx_at(int r, int i) const { return qx[static_cast<size_t>(r) * (dem.ncols + 1) + i]; }
    double& qy_at(int j, int c) { return qy[static_cast<size_t>(j) * dem.ncols + c]; }
    double qy_at(int j, int c) const { return qy[static_cast<size_t>(j) * dem.ncols + c]; }

    double stored_volume() const;  // sum h * dx^2 over non-NODATA cells
    double max_depth() const;
};

SolverState make_solver_state(const Grid& dem);

// min(dt_max, alpha*dx/sqrt(g*h_max)); dt_max when the domain is dry
// (h_max <= h_wet).
double stable_dt(const SolverState& state, const SolverConfig& cfg);

// One explicit update of the inertial scheme: per-face flux
//   q' = (q - g*h_f*dt*S) / (1 + g*dt*n^2*|q| / h_f^(7/3)),  q' = 0 if h_f <= h_wet
// with h_f = max(eta_i, eta_j) - max(z_i, z_j) and S the water-surface slope,
// then per-cell divergence plus point inflows Q*dt/dx^2. Domain-edge faces of
// wet cells discharge freely against a ghost cell with equal depth and the
// bed continuing at the local slope (outward flow only).
void step(SolverState& state, const BoundarySet& boundaries, const SolverConfig& cfg, double dt);

struct DepthSnapshot {
    int step = 0;      // index on the output cadence
    double t = 0.0;    // s
    Grid depth;
};
using DepthSeries = std::vector<DepthSnapshot>;

struct MassBalanceRow {
    double t = 0.0;
    double stored = 0.0;
    double inflow = 0.0;
    double outflow = 0.0;
    double clamp_correction = 0.0;
};

// Adaptive-dt run from t=0 (dry start) to duration, snapshotting at every
// multiple of the output interval (t=0 inclusive). The mass ledger is checked
// at every snapshot and reported per snapshot when `ledger` is non-null.
DepthSeries simulate(const Grid& dem, const BoundarySet& boundaries, const SolverConfig& cfg,
                     double duration_s, std::vector<MassBalanceRow>* ledger = nullptr);

// Relative mass-ledger tolerance used at snapshots.
inline constexpr double kMassBalanceTol = 1e-6;

// Run-directory layout: wd_<step>.asc per snapshot, series.csv manifest
// (step,t_seconds,path) and massbalance.csv
// (t,stored,inflow,outflow,clamp_correction).
void write_depth_series(const DepthSeries& series, const std::vector<MassBalanceRow>& ledger,
                        const std::string& run_dir);
DepthSeries read_depth_series(const std::string& run_dir);

}  // namespace flood
