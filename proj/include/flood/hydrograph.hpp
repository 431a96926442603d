#pragma once

#include <string>
#include <vector>

#include "flood/raster.hpp"

namespace flood {

// Uniformly sampled discharge series at one boundary location.
struct Hydrograph {
    std::string boundary_id;
    double t0 = 0.0;   // hours since event start
    double dt = 0.25;  // hours, uniform spacing
    std::vector<double> q;  // m^3/s, non-negative

    double peak() const;
    size_t peak_index() const;  // first index attaining the peak
    // Linear interpolation between ordinates; the series is zero-padded one
    // step beyond each end, so discharge ramps to 0 outside [t0, t_end].
    double discharge_at_hours(double t_hours) const;
    double end_hours() const { return t0 + dt * (q.empty() ? 0 : q.size() - 1); }
    void validate() const;
};

struct Boundary {
    std::string id;
    int row = 0;
    int col = 0;
    Hydrograph hydrograph;
};

// Boundaries bound to cells of one simulation grid; ids unique, cells
// non-NODATA.
struct BoundarySet {
    std::vector<Boundary> boundaries;
};

struct BoundaryLocation {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

BoundarySet bind_boundaries(const Grid& dem, const std::vector<BoundaryLocation>& locations,
                            const std::vector<Hydrograph>& hydrographs);

// CSV with header t_hours,<id1>,<id2>,...; strictly increasing, uniformly
// spaced times (tolerance 1e-9 h); one Hydrograph per discharge column.
std::vector<Hydrograph> read_hydrograph_csv(const std::string& path);
void write_hydrograph_csv(const std::vector<Hydrograph>& hydrographs, const std::string& path);

// Multiplies every ordinate by peak_max / peak(h); peak_max >= peak required.
Hydrograph scale_to_peak(const Hydrograph& h, double peak_max);

// Per-base peak lists applied via scale_to_peak; scenario k pairs the k-th
// peak of every base. With enforce_main_river_dominance the first base is the
// main river and its peak must exceed every tributary peak in each scenario.
std::vector<std::vector<Hydrograph>> generate_synthetic_set(const std::vector<Hydrograph>& bases,
                                                            const std::vector<std::vector<double>>& peaks,
                                                            bool enforce_main_river_dominance = false);

// Resamples onto a uniform grid (t0=0, given dt, n points) by linear
// interpolation, zero outside the series; used to align feature rows with
// solver snapshots.
Hydrograph resample_hydrograph(const Hydrograph& h, double dt_hours, size_t n);

}  // namespace flood
