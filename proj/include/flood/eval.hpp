#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flood/raster.hpp"
#include "flood/solver.hpp"

namespace flood {

struct ContingencyCounts {
    long tp = 0, tn = 0, fp = 0, fn = 0;
    long total() const { return tp + tn + fp + fn; }
};

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;  // some 0/0 case was flagged to 0
};

// sqrt(mean((sim - obs)^2)); lengths must match and be non-empty.
double rmse(const std::vector<double>& obs, const std::vector<double>& sim);
// mean(sim - obs); positive means overestimation.
double bias(const std::vector<double>& obs, const std::vector<double>& sim);

// Wet iff depth >= wet_threshold; counts over cells that are non-NODATA in
// both grids (NODATA masks symmetrically).
ContingencyCounts contingency(const Grid& obs, const Grid& sim, double wet_threshold);

// Precision = TP/(TP+FP), Recall = TP/(TP+FN), F1 = TP/(TP + (FP+FN)/2);
// 0/0 cases yield flagged zeros instead of errors.
Scores precision_recall_f1(const ContingencyCounts& c);

// Per-cell |sim - obs|; NODATA where either input is NODATA.
Grid error_map(const Grid& obs, const Grid& sim);

struct StageRecord {
    int step = 0;
    double rmse_m = 0.0;
    double bias_m = 0.0;
    ContingencyCounts counts;
    Scores scores;
};

struct MetricsReport {
    std::string dem_label;     // e.g. "DTM30"
    std::string dem_type;      // DTM | DSM
    double resolution_m = 0.0;
    bool station_scope = false;
    std::vector<StageRecord> records;
};

// One record per requested stage. RMSE/Bias are computed grid-wide over
// mutually valid cells, or over the station samples when stations are given;
// extent scores are always grid-wide.
MetricsReport stage_report(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                           double wet_threshold, const StationSet* stations = nullptr);

// report.csv schema shared by per-leg reports and the experiment summary.
inline constexpr const char* kReportHeader =
    "dem_label,dem_type,resolution_m,step,rmse_m,bias_m,tp,tn,fp,fn,precision,recall,f1";

std::string report_to_csv(const MetricsReport& report, bool with_header = true);
void write_report_csv(const MetricsReport& report, const std::string& path);

// err_<step>.asc error maps for the requested stages.
void write_error_maps(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                      const std::string& dir);

// stations_<label>.csv rows: station,step,obs_m,sim_m (empty field on NODATA).
void write_station_series(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                          const StationSet& stations, const std::string& path);

}  // namespace flood
