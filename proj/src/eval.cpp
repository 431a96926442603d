#include "flood/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace flood {

double rmse(const std::vector<double>& obs, const std::vector<double>& sim) {
    if (obs.size() != sim.size()) throw validation_error("rmse: length mismatch");
    if (obs.empty()) throw validation_error("rmse: no values left after NODATA masking");
    double ss = 0.0;
    for (size_t i = 0; i < obs.size(); ++i) {
        const double d = sim[i] - obs[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(obs.size()));
}

double bias(const std::vector<double>& obs, const std::vector<double>& sim) {
    if (obs.size() != sim.size()) throw validation_error("bias: length mismatch");
    if (obs.empty()) throw validation_error("bias: no values left after NODATA masking");
    double sum = 0.0;
    for (size_t i = 0; i < obs.size(); ++i) sum += sim[i] - obs[i];
    return sum / static_cast<double>(obs.size());
}

ContingencyCounts contingency(const Grid& obs, const Grid& sim, double wet_threshold) {
    require_aligned(obs, sim, "contingency");
    ContingencyCounts c;
    for (size_t i = 0; i < obs.values.size(); ++i) {
        const double o = obs.values[i];
        const double s = sim.values[i];
        if (obs.is_nodata(o) || sim.is_nodata(s)) continue;
        const bool obs_wet = o >= wet_threshold;
        const bool sim_wet = s >= wet_threshold;
        if (obs_wet && sim_wet) ++c.tp;
        else if (!obs_wet && !sim_wet) ++c.tn;
        else if (!obs_wet && sim_wet) ++c.fp;
        else ++c.fn;
    }
    return c;
}

Scores precision_recall_f1(const ContingencyCounts& c) {
    Scores s;
    if (c.tp + c.fp > 0) {
        s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    } else {
        s.degenerate = true;
    }
    if (c.tp + c.fn > 0) {
        s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    } else {
        s.degenerate = true;
    }
    const double f1_den = static_cast<double>(c.tp) + 0.5 * static_cast<double>(c.fp + c.fn);
    if (f1_den > 0) {
        s.f1 = static_cast<double>(c.tp) / f1_den;
    } else {
        s.degenerate = true;
    }
    return s;
}

Grid error_map(const Grid& obs, const Grid& sim) {
    require_aligned(obs, sim, "error_map");
    Grid out = obs;
    for (size_t i = 0; i < out.values.size(); ++i) {
        const double o = obs.values[i];
        const double s = sim.values[i];
        out.values[i] = (obs.is_nodata(o) || sim.is_nodata(s)) ? out.nodata : std::abs(s - o);
    }
    return out;
}

namespace {

const DepthSnapshot& find_step(const DepthSeries& series, int step, const std::string& which) {
    for (const auto& snap : series)
        if (snap.step == step) return snap;
    throw validation_error("stage_report: " + which + " series has no snapshot for step " +
                           std::to_string(step));
}

// Mutually valid cell pairs for grid-wide depth errors.
void gather_valid(const Grid& obs, const Grid& sim, std::vector<double>& o, std::vector<double>& s) {
    o.clear();
    s.clear();
    for (size_t i = 0; i < obs.values.size(); ++i) {
        if (obs.is_nodata(obs.values[i]) || sim.is_nodata(sim.values[i])) continue;
        o.push_back(obs.values[i]);
        s.push_back(sim.values[i]);
    }
}

}  // namespace

MetricsReport stage_report(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                           double wet_threshold, const StationSet* stations) {
    MetricsReport report;
    report.station_scope = (stations != nullptr);
    std::vector<double> o, s;
    for (int step : stages) {
        const auto& obs_snap = find_step(obs, step, "observed");
        const auto& sim_snap = find_step(sim, step, "simulated");
        require_aligned(obs_snap.depth, sim_snap.depth, "stage_report");

        StageRecord rec;
        rec.step = step;
        if (stations) {
            const auto obs_samples = sample_at_points(obs_snap.depth, *stations);
            const auto sim_samples = sample_at_points(sim_snap.depth, *stations);
            o.clear();
            s.clear();
            for (size_t i = 0; i < obs_samples.size(); ++i) {
                if (!obs_samples[i].second.has_value() || !sim_samples[i].second.has_value()) continue;
                o.push_back(*obs_samples[i].second);
                s.push_back(*sim_samples[i].second);
            }
        } else {
            gather_valid(obs_snap.depth, sim_snap.depth, o, s);
        }
        rec.rmse_m = rmse(o, s);
        rec.bias_m = bias(o, s);
        rec.counts = contingency(obs_snap.depth, sim_snap.depth, wet_threshold);
        rec.scores = precision_recall_f1(rec.counts);
        report.records.push_back(rec);
    }
    return report;
}

std::string report_to_csv(const MetricsReport& report, bool with_header) {
    std::string out;
    if (with_header) {
        out += kReportHeader;
        out += '\n';
    }
    for (const auto& rec : report.records) {
        out += report.dem_label + "," + report.dem_type + "," + format_double(report.resolution_m) + "," +
               std::to_string(rec.step) + "," + format_double(rec.rmse_m) + "," + format_double(rec.bias_m) +
               "," + std::to_string(rec.counts.tp) + "," + std::to_string(rec.counts.tn) + "," +
               std::to_string(rec.counts.fp) + "," + std::to_string(rec.counts.fn) + "," +
               format_double(rec.scores.precision) + "," + format_double(rec.scores.recall) + "," +
               format_double(rec.scores.f1) + "\n";
    }
    return out;
}

void write_report_csv(const MetricsReport& report, const std::string& path) {
    write_text_file(path, report_to_csv(report));
}

void write_error_maps(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                      const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (int step : stages) {
        const auto& obs_snap = find_step(obs, step, "observed");
        const auto& sim_snap = find_step(sim, step, "simulated");
        write_ascii_grid(error_map(obs_snap.depth, sim_snap.depth), dir + "/err_" + std::to_string(step) + ".asc");
    }
}

void write_station_series(const DepthSeries& obs, const DepthSeries& sim, const std::vector<int>& stages,
                          const StationSet& stations, const std::string& path) {
    std::string out = "station,step,obs_m,sim_m\n";
    for (int step : stages) {
        const auto& obs_snap = find_step(obs, step, "observed");
        const auto& sim_snap = find_step(sim, step, "simulated");
        const auto obs_samples = sample_at_points(obs_snap.depth, stations);
        const auto sim_samples = sample_at_points(sim_snap.depth, stations);
        for (size_t i = 0; i < obs_samples.size(); ++i) {
            out += obs_samples[i].first + "," + std::to_string(step) + ",";
            if (obs_samples[i].second) out += format_double(*obs_samples[i].second);
            out += ",";
            if (sim_samples[i].second) out += format_double(*sim_samples[i].second);
            out += "\n";
        }
    }
    write_text_file(path, out);
}

}  // namespace flood
