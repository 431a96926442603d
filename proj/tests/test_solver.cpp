#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "flood/solver.hpp"

using namespace flood;

namespace {

Hydrograph constant_hydrograph(double q, double hours = 100.0) {
    Hydrograph h;
    h.boundary_id = "in";
    h.t0 = 0.0;
    h.dt = 0.25;
    h.q.assign(static_cast<size_t>(hours / 0.25) + 1, q);
    return h;
}

// Event-shaped inflow rising smoothly from zero (a discharge step onto a dry
// cell is the documented wetting-shock case).
Hydrograph event_hydrograph(double peak, double peak_hours, double hours) {
    Hydrograph h;
    h.boundary_id = "in";
    h.t0 = 0.0;
    h.dt = 0.25;
    for (double t = 0.0; t <= hours + 1e-9; t += 0.25) {
        const double x = t / peak_hours;
        h.q.push_back(t <= 0.0 ? 0.0 : peak * std::pow(x * std::exp(1.0 - x), 4.0));
    }
    return h;
}

BoundarySet boundary_at(const Grid& /*dem*/ , int row, int col, const Hydrograph& h) {
    BoundarySet set;
    Boundary b;
    b.id = h.boundary_id;
    b.row = row;
    b.col = col;
    b.hydrograph = h;
    set.boundaries.push_back(b);
    return set;
}

// V-valley with a center column, mirror-symmetric about it.
Grid mirror_valley(int nrows, int ncols) {
    Grid dem = make_grid(nrows, ncols, 0, 0, 10.0);
    const double x_axis = dem.xll + 0.5 * ncols * dem.cellsize;
    for (int r = 0; r < nrows; ++r)
        for (int c = 0; c < ncols; ++c)
            dem.at(r, c) = 0.04 * std::abs(dem.cell_center_x(c) - x_axis) + 0.002 * dem.cell_center_y(r);
    return dem;
}

}  // namespace

TEST_CASE("stable_dt evaluates the CFL formula") {
    Grid dem = make_grid(2, 2, 0, 0, 30.0, 0.0);
    SolverState st = make_solver_state(dem);
    st.h.at(0, 0) = 2.0;
    SolverConfig cfg;
    cfg.alpha = 0.7;
    cfg.dt_max = 100.0;
    // frozen from an independent evaluation of alpha*dx/sqrt(g*h_max)
    CHECK(stable_dt(st, cfg) == doctest::Approx(4.741807935393769).epsilon(1e-14));

    cfg.alpha = 0.35;
    CHECK(stable_dt(st, cfg) == doctest::Approx(0.5 * 4.741807935393769).epsilon(1e-14));

    cfg.alpha = 0.7;
    cfg.dt_max = 2.0;
    CHECK(stable_dt(st, cfg) == 2.0);
}

TEST_CASE("dry domain returns dt_max") {
    Grid dem = make_grid(3, 3, 0, 0, 10.0, 1.0);
    SolverState st = make_solver_state(dem);
    SolverConfig cfg;
    CHECK(stable_dt(st, cfg) == cfg.dt_max);
    st.h.at(1, 1) = cfg.h_wet;  // still "dry" at the threshold
    CHECK(stable_dt(st, cfg) == cfg.dt_max);
}

TEST_CASE("lake at rest stays at rest over an irregular bed") {
    Grid dem = make_grid(6, 7, 0, 0, 10.0);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 7; ++c) dem.at(r, c) = 0.3 * ((r * 7 + c) % 5) + 1.0;
    // wall the domain edges so the pond cannot legitimately drain
    for (int r = 0; r < 6; ++r) { dem.at(r, 0) = 50.0; dem.at(r, 6) = 50.0; }
    for (int c = 0; c < 7; ++c) { dem.at(0, c) = 50.0; dem.at(5, c) = 50.0; }
    const double eta = 3.5;
    SolverState st = make_solver_state(dem);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 7; ++c) st.h.at(r, c) = std::max(0.0, eta - dem.at(r, c));
    const Grid h0 = st.h;
    SolverConfig cfg;
    BoundarySet none;
    for (int i = 0; i < 1000; ++i) step(st, none, cfg, stable_dt(st, cfg));
    double max_dh = 0.0;
    for (size_t i = 0; i < h0.values.size(); ++i)
        max_dh = std::max(max_dh, std::abs(st.h.values[i] - h0.values[i]));
    CHECK(max_dh <= 1e-12);
    CHECK(st.outflow_volume == 0.0);
}

TEST_CASE("a point inflow raises a single closed cell by Q*dt/dx^2") {
    // NODATA ring isolates the center cell
    Grid dem = make_grid(3, 3, 0, 0, 10.0, 0.0);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (r != 1 || c != 1) dem.at(r, c) = dem.nodata;
    SolverState st = make_solver_state(dem);
    SolverConfig cfg;
    BoundarySet bset = boundary_at(dem, 1, 1, constant_hydrograph(10.0));
    step(st, bset, cfg, 2.0);
    CHECK(st.h.at(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(st.inflow_volume == doctest::Approx(20.0));
    CHECK(st.h.at(0, 0) == 0.0);
}

TEST_CASE("two-cell closed basin relaxes to a level surface") {
    Grid dem = make_grid(1, 2, 0, 0, 10.0, 0.0);
    SolverState st = make_solver_state(dem);
    st.h.at(0, 0) = 1.0;
    st.h.at(0, 1) = 0.0;
    SolverConfig cfg;
    cfg.manning_n = 0.5;  // friction-dominated so the exchange relaxes monotonically
    BoundarySet none;
    double diff = 1.0;
    for (int i = 0; i < 10000 && diff > 1e-6; ++i) {
        step(st, none, cfg, stable_dt(st, cfg));
        diff = std::abs(st.h.at(0, 0) - st.h.at(0, 1));
    }
    CHECK(diff <= 1e-6);
    CHECK(st.h.at(0, 0) == doctest::Approx(0.5).epsilon(1e-5));
    // flat bed: edge ghosts have equal surface, nothing leaves
    CHECK(st.outflow_volume == 0.0);
    CHECK(st.stored_volume() == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("zero inflow over a dry domain yields all-zero snapshots") {
    Grid dem = mirror_valley(8, 9);
    SolverConfig cfg;
    cfg.output_interval = 900.0;
    BoundarySet bset = boundary_at(dem, 1, 4, constant_hydrograph(0.0));
    DepthSeries series = simulate(dem, bset, cfg, 3600.0, nullptr);
    REQUIRE(series.size() == 5);
    for (const auto& snap : series)
        for (double v : snap.depth.values) CHECK(v == 0.0);
}

TEST_CASE("48 h at 900 s cadence yields 193 snapshots with the paper's stage indexing") {
    Grid dem = mirror_valley(6, 7);
    SolverConfig cfg;
    BoundarySet bset = boundary_at(dem, 1, 3, constant_hydrograph(0.0));
    DepthSeries series = simulate(dem, bset, cfg, 48.0 * 3600.0, nullptr);
    REQUIRE(series.size() == 193);
    CHECK(series.front().step == 0);
    CHECK(series.back().step == 192);
    CHECK(series[48].t == doctest::Approx(12.0 * 3600.0));
    CHECK(series[96].t == doctest::Approx(24.0 * 3600.0));
    CHECK(series[144].t == doctest::Approx(36.0 * 3600.0));
    CHECK(series[192].t == doctest::Approx(48.0 * 3600.0));
}

TEST_CASE("mass ledger closes on a draining valley") {
    Grid dem = mirror_valley(12, 9);
    SolverConfig cfg;
    Hydrograph h;
    h.boundary_id = "in";
    h.t0 = 0.0;
    h.dt = 0.25;
    for (int i = 0; i <= 24; ++i) h.q.push_back(8.0 * i / 24.0);  // ramp 0 -> 8 m^3/s over 6 h
    for (int i = 0; i < 24; ++i) h.q.push_back(8.0);
    BoundarySet bset = boundary_at(dem, 1, 4, h);
    std::vector<MassBalanceRow> ledger;
    DepthSeries series = simulate(dem, bset, cfg, 12.0 * 3600.0, &ledger);
    REQUIRE(!ledger.empty());
    const auto& last = ledger.back();
    CHECK(last.inflow > 0.0);
    CHECK(last.outflow > 0.0);  // valley drains through the south edge
    for (const auto& row : ledger) {
        CHECK(std::abs(row.stored - (row.inflow - row.outflow)) <= 1e-6 * std::max(row.inflow, 1.0));
    }
    // non-negativity across all snapshots
    for (const auto& snap : series)
        for (double v : snap.depth.values)
            if (!snap.depth.is_nodata(v)) CHECK(v >= 0.0);
}

TEST_CASE("mirror-symmetric valley with a centered inflow stays symmetric") {
    Grid dem = mirror_valley(20, 33);  // odd width, center column 16
    SolverConfig cfg;
    BoundarySet bset = boundary_at(dem, 1, 16, event_hydrograph(40.0, 1.5, 4.0));
    DepthSeries series = simulate(dem, bset, cfg, 4.0 * 3600.0, nullptr);
    double worst = 0.0;
    for (const auto& snap : series)
        for (int r = 0; r < dem.nrows; ++r)
            for (int c = 0; c < dem.ncols; ++c)
                worst = std::max(worst, std::abs(snap.depth.at(r, c) - snap.depth.at(r, dem.ncols - 1 - c)));
    CHECK(worst <= 1e-9);
}

TEST_CASE("identical inputs produce bit-identical series") {
    Grid dem = mirror_valley(10, 11);
    SolverConfig cfg;
    BoundarySet bset = boundary_at(dem, 1, 5, event_hydrograph(15.0, 1.0, 3.0));
    DepthSeries a = simulate(dem, bset, cfg, 3.0 * 3600.0, nullptr);
    DepthSeries b = simulate(dem, bset, cfg, 3.0 * 3600.0, nullptr);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].depth.values.size(); ++j)
            REQUIRE(a[i].depth.values[j] == b[i].depth.values[j]);
}

TEST_CASE("gross CFL violations are reported as numerical blowup") {
    Grid dem = mirror_valley(8, 9);
    SolverState st = make_solver_state(dem);
    st.h.at(4, 4) = 5.0;
    SolverConfig cfg;
    cfg.dt_max = 1e10;
    BoundarySet none;
    bool blew_up = false;
    try {
        for (int i = 0; i < 50; ++i) step(st, none, cfg, 1e7);
    } catch (const numerical_error&) {
        blew_up = true;
    }
    CHECK(blew_up);
}

TEST_CASE("simulate validates inputs") {
    Grid dem = mirror_valley(4, 5);
    SolverConfig cfg;
    BoundarySet bset = boundary_at(dem, 1, 2, constant_hydrograph(1.0));
    CHECK_THROWS_AS(simulate(dem, bset, cfg, -5.0, nullptr), validation_error);
    BoundarySet off = boundary_at(dem, 99, 2, constant_hydrograph(1.0));
    CHECK_THROWS_AS(simulate(dem, off, cfg, 100.0, nullptr), validation_error);
    Grid holed = dem;
    holed.at(1, 2) = holed.nodata;
    CHECK_THROWS_AS(simulate(holed, bset, cfg, 100.0, nullptr), validation_error);
}

TEST_CASE("depth series round-trips through the run directory format") {
    Grid dem = mirror_valley(4, 5);
    SolverConfig cfg;
    cfg.output_interval = 600.0;
    BoundarySet bset = boundary_at(dem, 1, 2, event_hydrograph(3.0, 0.25, 1.0));
    std::vector<MassBalanceRow> ledger;
    DepthSeries series = simulate(dem, bset, cfg, 1800.0, &ledger);
    const std::string dir = (std::filesystem::temp_directory_path() / "flood_run_rt").string();
    std::filesystem::remove_all(dir);
    write_depth_series(series, ledger, dir);
    CHECK(std::filesystem::exists(dir + "/series.csv"));
    CHECK(std::filesystem::exists(dir + "/massbalance.csv"));
    DepthSeries back = read_depth_series(dir);
    REQUIRE(back.size() == series.size());
    for (size_t i = 0; i < series.size(); ++i) {
        CHECK(back[i].step == series[i].step);
        CHECK(back[i].t == series[i].t);
        for (size_t j = 0; j < series[i].depth.values.size(); ++j)
            REQUIRE(back[i].depth.values[j] == series[i].depth.values[j]);
    }
}
