#include "flood/solver.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

namespace flood {

void SolverConfig::validate() const {
    if (!(manning_n > 0)) throw validation_error("solver config: manning_n must be positive");
    if (!(alpha > 0) || alpha > 1.0) throw validation_error("solver config: alpha must be in (0, 1]");
    if (!(dt_max > 0)) throw validation_error("solver config: dt_max must be positive");
    if (!(h_wet > 0)) throw validation_error("solver config: h_wet must be positive");
    if (!(output_interval > 0)) throw validation_error("solver config: output_interval must be positive");
}

SolverState make_solver_state(const Grid& dem) {
    dem.validate("solver");
    SolverState s;
    s.dem = dem;
    s.h = dem;
    std::fill(s.h.values.begin(), s.h.values.end(), 0.0);
    s.qx.assign(static_cast<size_t>(dem.nrows) * (dem.ncols + 1), 0.0);
    s.qy.assign(static_cast<size_t>(dem.nrows + 1) * dem.ncols, 0.0);
    return s;
}

double SolverState::stored_volume() const {
    const double cell_area = dem.cellsize * dem.cellsize;
    double sum = 0.0;
    for (size_t i = 0; i < h.values.size(); ++i) {
        if (dem.values[i] == dem.nodata) continue;
        sum += h.values[i];
    }
    return sum * cell_area;
}

double SolverState::max_depth() const {
    double hmax = 0.0;
    for (size_t i = 0; i < h.values.size(); ++i) {
        if (dem.values[i] == dem.nodata) continue;
        if (h.values[i] > hmax) hmax = h.values[i];
    }
    return hmax;
}

double stable_dt(const SolverState& state, const SolverConfig& cfg) {
    const double hmax = state.max_depth();
    if (hmax <= cfg.h_wet) return cfg.dt_max;
    const double dt = cfg.alpha * state.dem.cellsize / std::sqrt(kGravity * hmax);
    return std::min(cfg.dt_max, dt);
}

namespace {

// Inertial-formulation face update; returns the new unit-width discharge for
// a face with flow depth h_f and surface slope s along the positive face
// direction.
inline double face_flux(double q_old, double h_f, double s, double dt, double n, double h_wet) {
    if (h_f <= h_wet) return 0.0;
    const double numerator = q_old - kGravity * h_f * dt * s;
    const double denominator = 1.0 + kGravity * dt * n * n * std::abs(q_old) / (h_f * h_f * std::cbrt(h_f));
    return numerator / denominator;
}

[[noreturn]] void blowup(double t, int r, int c) {
    throw numerical_error("numerical blowup (NaN/Inf) at t=" + format_double(t) + " s, cell (" +
                          std::to_string(r) + ", " + std::to_string(c) + ")");
}

}  // namespace

void step(SolverState& state, const BoundarySet& boundaries, const SolverConfig& cfg, double dt) {
    const Grid& dem = state.dem;
    Grid& h = state.h;
    const int nrows = dem.nrows;
    const int ncols = dem.ncols;
    const double dx = dem.cellsize;
    const double n = cfg.manning_n;
    const double nodata = dem.nodata;
    const double cell_area = dx * dx;

    double outflow_step = 0.0;

    // qx: faces between (r, i-1) and (r, i), positive eastward.
    for (int r = 0; r < nrows; ++r) {
        const size_t row = static_cast<size_t>(r) * ncols;
        const size_t qrow = static_cast<size_t>(r) * (ncols + 1);
        for (int i = 0; i <= ncols; ++i) {
            double& q = state.qx[qrow + i];
            const bool west_edge = (i == 0);
            const bool east_edge = (i == ncols);
            if (west_edge || east_edge) {
                // Free outflow against a ghost cell: equal depth, bed
                // continuing at the local slope, outward flow only.
                const int c = west_edge ? 0 : ncols - 1;
                const double z = dem.values[row + c];
                if (z == nodata) { q = 0.0; continue; }
                const double hc = h.values[row + c];
                const int inner = west_edge ? c + 1 : c - 1;
                double z_in = (inner >= 0 && inner < ncols) ? dem.values[row + inner] : nodata;
                const double z_ghost = (z_in == nodata) ? z : z + (z - z_in);
                const double eta = z + hc;
                const double eta_ghost = z_ghost + hc;
                const double h_f = std::max(eta, eta_ghost) - std::max(z, z_ghost);
                // Slope along +x: ghost sits west of a west edge, east of an
                // east edge.
                const double s = west_edge ? (eta - eta_ghost) / dx : (eta_ghost - eta) / dx;
                double qn = face_flux(q, h_f, s, dt, n, cfg.h_wet);
                if (west_edge) {
                    if (qn > 0.0) qn = 0.0;  // outward only (westward is negative)
                    outflow_step += -qn * dx * dt;
                } else {
                    if (qn < 0.0) qn = 0.0;
                    outflow_step += qn * dx * dt;
                }
                if (!std::isfinite(qn)) blowup(state.t, r, c);
                q = qn;
                continue;
            }
            const double za = dem.values[row + i - 1];
            const double zb = dem.values[row + i];
            if (za == nodata || zb == nodata) { q = 0.0; continue; }
            const double eta_a = za + h.values[row + i - 1];
            const double eta_b = zb + h.values[row + i];
            const double h_f = std::max(eta_a, eta_b) - std::max(za, zb);
            const double s = (eta_b - eta_a) / dx;
            const double qn = face_flux(q, h_f, s, dt, n, cfg.h_wet);
            if (!std::isfinite(qn)) blowup(state.t, r, i);
            q = qn;
        }
    }

    // qy: faces between rows j-1 and j, positive southward.
    for (int j = 0; j <= nrows; ++j) {
        const size_t qrow = static_cast<size_t>(j) * ncols;
        for (int c = 0; c < ncols; ++c) {
            double& q = state.qy[qrow + c];
            const bool north_edge = (j == 0);
            const bool south_edge = (j == nrows);
            if (north_edge || south_edge) {
                const int r = north_edge ? 0 : nrows - 1;
                const size_t row = static_cast<size_t>(r) * ncols;
                const double z = dem.values[row + c];
                if (z == nodata) { q = 0.0; continue; }
                const double hc = h.values[row + c];
                const int inner = north_edge ? r + 1 : r - 1;
                double z_in = (inner >= 0 && inner < nrows)
                                  ? dem.values[static_cast<size_t>(inner) * ncols + c]
                                  : nodata;
                const double z_ghost = (z_in == nodata) ? z : z + (z - z_in);
                const double eta = z + hc;
                const double eta_ghost = z_ghost + hc;
                const double h_f = std::max(eta, eta_ghost) - std::max(z, z_ghost);
                const double s = north_edge ? (eta - eta_ghost) / dx : (eta_ghost - eta) / dx;
                double qn = face_flux(q, h_f, s, dt, n, cfg.h_wet);
                if (north_edge) {
                    if (qn > 0.0) qn = 0.0;  // outward only (northward is negative)
                    outflow_step += -qn * dx * dt;
                } else {
                    if (qn < 0.0) qn = 0.0;
                    outflow_step += qn * dx * dt;
                }
                if (!std::isfinite(qn)) blowup(state.t, r, c);
                q = qn;
                continue;
            }
            const size_t row_a = static_cast<size_t>(j - 1) * ncols;
            const size_t row_b = static_cast<size_t>(j) * ncols;
            const double za = dem.values[row_a + c];
            const double zb = dem.values[row_b + c];
            if (za == nodata || zb == nodata) { q = 0.0; continue; }
            const double eta_a = za + h.values[row_a + c];
            const double eta_b = zb + h.values[row_b + c];
            const double h_f = std::max(eta_a, eta_b) - std::max(za, zb);
            const double s = (eta_b - eta_a) / dx;
            const double qn = face_flux(q, h_f, s, dt, n, cfg.h_wet);
            if (!std::isfinite(qn)) blowup(state.t, j, c);
            q = qn;
        }
    }

    // Depth update: face divergence plus point inflows, then the zero clamp.
    for (int r = 0; r < nrows; ++r) {
        const size_t row = static_cast<size_t>(r) * ncols;
        const size_t qxrow = static_cast<size_t>(r) * (ncols + 1);
        const size_t qyrow_n = static_cast<size_t>(r) * ncols;
        const size_t qyrow_s = static_cast<size_t>(r + 1) * ncols;
        for (int c = 0; c < ncols; ++c) {
            if (dem.values[row + c] == nodata) continue;
            const double div = (state.qx[qxrow + c] - state.qx[qxrow + c + 1]) +
                               (state.qy[qyrow_n + c] - state.qy[qyrow_s + c]);
            h.values[row + c] += dt * div / dx;
        }
    }

    // Point inflows, linearly interpolated at mid-step.
    const double t_mid_hours = (state.t + 0.5 * dt) / 3600.0;
    double inflow_step = 0.0;
    for (const auto& b : boundaries.boundaries) {
        const double discharge = b.hydrograph.discharge_at_hours(t_mid_hours);
        if (discharge == 0.0) continue;
        h.at(b.row, b.col) += discharge * dt / cell_area;
        inflow_step += discharge * dt;
    }

    double clamp_step = 0.0;
    for (int r = 0; r < nrows; ++r) {
        const size_t row = static_cast<size_t>(r) * ncols;
        for (int c = 0; c < ncols; ++c) {
            if (dem.values[row + c] == nodata) continue;
            double hv = h.values[row + c];
            if (hv < 0.0) {
                clamp_step += -hv;
                hv = 0.0;
                h.values[row + c] = hv;
            }
            if (!std::isfinite(hv)) blowup(state.t, r, c);
        }
    }

    state.inflow_volume += inflow_step;
    state.outflow_volume += outflow_step;
    state.clamp_correction += clamp_step * cell_area;
    state.t += dt;
}

DepthSeries simulate(const Grid& dem, const BoundarySet& boundaries, const SolverConfig& cfg,
                     double duration_s, std::vector<MassBalanceRow>* ledger) {
    cfg.validate();
    if (!(duration_s > 0)) throw validation_error("simulate: duration must be positive");
    for (const auto& b : boundaries.boundaries) {
        b.hydrograph.validate();
        if (b.row < 0 || b.row >= dem.nrows || b.col < 0 || b.col >= dem.ncols)
            throw validation_error("simulate: boundary '" + b.id + "' cell is outside the grid");
        if (dem.is_nodata_at(b.row, b.col))
            throw validation_error("simulate: boundary '" + b.id + "' falls on a NODATA cell");
    }

    SolverState state = make_solver_state(dem);
    DepthSeries series;

    auto check_ledger = [&](double t) {
        const double stored = state.stored_volume();
        const double error = std::abs(stored - (state.inflow_volume - state.outflow_volume));
        if (error > kMassBalanceTol * std::max(state.inflow_volume, 1.0))
            throw numerical_error("mass balance violated at t=" + format_double(t) + " s: stored=" +
                                  format_double(stored) + " inflow=" + format_double(state.inflow_volume) +
                                  " outflow=" + format_double(state.outflow_volume));
        if (ledger)
            ledger->push_back({t, stored, state.inflow_volume, state.outflow_volume, state.clamp_correction});
    };

    series.push_back({0, 0.0, state.h});
    check_ledger(0.0);

    const double oi = cfg.output_interval;
    const long last_snapshot = static_cast<long>(std::floor(duration_s / oi + 1e-9));
    long k = 1;
    while (true) {
        double target = (k <= last_snapshot) ? k * oi : duration_s;
        if (target > duration_s) target = duration_s;
        if (state.t >= duration_s) break;
        while (state.t < target) {
            const double dt = std::min(stable_dt(state, cfg), target - state.t);
            step(state, boundaries, cfg, dt);
        }
        state.t = target;  // pin against accumulation drift
        if (k <= last_snapshot) series.push_back({static_cast<int>(k), target, state.h});
        check_ledger(target);
        if (target >= duration_s) break;
        ++k;
    }
    return series;
}

void write_depth_series(const DepthSeries& series, const std::vector<MassBalanceRow>& ledger,
                        const std::string& run_dir) {
    std::filesystem::create_directories(run_dir);
    std::string manifest = "step,t_seconds,path\n";
    for (const auto& snap : series) {
        const std::string name = "wd_" + std::to_string(snap.step) + ".asc";
        write_ascii_grid(snap.depth, run_dir + "/" + name);
        manifest += std::to_string(snap.step) + "," + format_double(snap.t) + "," + name + "\n";
    }
    write_text_file(run_dir + "/series.csv", manifest);
    std::string mass = "t,stored,inflow,outflow,clamp_correction\n";
    for (const auto& row : ledger) {
        mass += format_double(row.t) + "," + format_double(row.stored) + "," + format_double(row.inflow) + "," +
                format_double(row.outflow) + "," + format_double(row.clamp_correction) + "\n";
    }
    write_text_file(run_dir + "/massbalance.csv", mass);
}

DepthSeries read_depth_series(const std::string& run_dir) {
    std::istringstream in(read_text_file(run_dir + "/series.csv"));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "step,t_seconds,path")
        throw parse_error(run_dir + "/series.csv: expected header 'step,t_seconds,path'");
    DepthSeries series;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto cols = split(t, ',');
        if (cols.size() != 3)
            throw parse_error(run_dir + "/series.csv:" + std::to_string(lineno) + ": expected 3 columns");
        DepthSnapshot snap;
        snap.step = static_cast<int>(parse_long(cols[0], "step"));
        snap.t = parse_double(cols[1], "t_seconds");
        snap.depth = read_ascii_grid(run_dir + "/" + cols[2]);
        series.push_back(std::move(snap));
    }
    return series;
}

}  // namespace flood
