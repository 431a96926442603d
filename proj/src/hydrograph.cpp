#include "flood/hydrograph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flood {

double Hydrograph::peak() const {
    return q.empty() ? 0.0 : *std::max_element(q.begin(), q.end());
}

size_t Hydrograph::peak_index() const {
    return static_cast<size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

double Hydrograph::discharge_at_hours(double t_hours) const {
    if (q.empty()) return 0.0;
    const double pos = (t_hours - t0) / dt;
    // One zero ordinate pads each end of the series.
    if (pos <= -1.0 || pos >= static_cast<double>(q.size())) return 0.0;
    const double lo = std::floor(pos);
    const double frac = pos - lo;
    const long i = static_cast<long>(lo);
    const double q0 = (i < 0) ? 0.0 : q[static_cast<size_t>(i)];
    const double q1 = (i + 1 >= static_cast<long>(q.size())) ? 0.0 : q[static_cast<size_t>(i + 1)];
    return q0 * (1.0 - frac) + q1 * frac;
}

void Hydrograph::validate() const {
    if (q.empty()) throw validation_error("hydrograph '" + boundary_id + "' is empty");
    if (!(dt > 0)) throw validation_error("hydrograph '" + boundary_id + "' has non-positive dt");
    for (size_t i = 0; i < q.size(); ++i)
        if (!(q[i] >= 0) || !std::isfinite(q[i]))
            throw validation_error("hydrograph '" + boundary_id + "' has negative or non-finite discharge at index " +
                                   std::to_string(i));
}

BoundarySet bind_boundaries(const Grid& dem, const std::vector<BoundaryLocation>& locations,
                            const std::vector<Hydrograph>& hydrographs) {
    BoundarySet set;
    for (const auto& [id, x, y] : locations) {
        if (!dem.contains(x, y))
            throw validation_error("boundary '" + id + "' at (" + format_double(x) + ", " + format_double(y) +
                                   ") is outside the DEM extent");
        Boundary b;
        b.id = id;
        dem.cell_of(x, y, b.row, b.col);
        if (dem.is_nodata_at(b.row, b.col))
            throw validation_error("boundary '" + id + "' falls on a NODATA cell");
        auto it = std::find_if(hydrographs.begin(), hydrographs.end(),
                               [&](const Hydrograph& h) { return h.boundary_id == id; });
        if (it == hydrographs.end()) throw validation_error("no hydrograph for boundary '" + id + "'");
        b.hydrograph = *it;
        b.hydrograph.validate();
        for (const auto& other : set.boundaries)
            if (other.id == b.id) throw validation_error("duplicate boundary id '" + b.id + "'");
        set.boundaries.push_back(std::move(b));
    }
    return set;
}

std::vector<Hydrograph> read_hydrograph_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ": empty hydrograph file");
    auto header = split(trim(line), ',');
    if (header.size() < 2 || trim(header[0]) != "t_hours")
        throw parse_error(path + ": header must be 't_hours,<id1>,...'");

    const size_t ncolumns = header.size();
    std::vector<Hydrograph> out(ncolumns - 1);
    for (size_t j = 1; j < ncolumns; ++j) out[j - 1].boundary_id = trim(header[j]);

    std::vector<double> times;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto cols = split(t, ',');
        if (cols.size() != ncolumns)
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(ncolumns) +
                              " columns, found " + std::to_string(cols.size()));
        times.push_back(parse_double(trim(cols[0]), "t_hours"));
        for (size_t j = 1; j < ncolumns; ++j) {
            const double q = parse_double(trim(cols[j]), "discharge");
            if (q < 0)
                throw parse_error(path + ":" + std::to_string(lineno) + ": negative discharge for '" +
                                  out[j - 1].boundary_id + "'");
            out[j - 1].q.push_back(q);
        }
    }
    if (times.size() < 2)
        throw parse_error(path + ": need at least 2 rows to infer the time spacing");
    const double dt = times[1] - times[0];
    if (!(dt > 0)) throw parse_error(path + ": times must be strictly increasing");
    for (size_t i = 2; i < times.size(); ++i) {
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9)
            throw parse_error(path + ": non-uniform time spacing at row " + std::to_string(i + 2) +
                              " (expected dt " + format_double(dt) + " h)");
    }
    for (auto& h : out) {
        h.t0 = times[0];
        h.dt = dt;
        h.validate();
    }
    return out;
}

void write_hydrograph_csv(const std::vector<Hydrograph>& hydrographs, const std::string& path) {
    if (hydrographs.empty()) throw validation_error("write_hydrograph_csv: no hydrographs");
    const auto& first = hydrographs.front();
    for (const auto& h : hydrographs) {
        h.validate();
        if (h.t0 != first.t0 || h.dt != first.dt || h.q.size() != first.q.size())
            throw validation_error("write_hydrograph_csv: hydrographs must share t0, dt and length");
    }
    std::string out = "t_hours";
    for (const auto& h : hydrographs) out += "," + h.boundary_id;
    out += "\n";
    for (size_t i = 0; i < first.q.size(); ++i) {
        out += format_double(first.t0 + first.dt * static_cast<double>(i));
        for (const auto& h : hydrographs) out += "," + format_double(h.q[i]);
        out += "\n";
    }
    write_text_file(path, out);
}

Hydrograph scale_to_peak(const Hydrograph& h, double peak_max) {
    h.validate();
    const double p = h.peak();
    if (!(p > 0)) throw validation_error("scale_to_peak: all-zero hydrograph '" + h.boundary_id +
                                         "' (scaling ratio undefined)");
    if (peak_max < p)
        throw validation_error("scale_to_peak: Peak_max " + format_double(peak_max) + " is below the observed peak " +
                               format_double(p) + " for '" + h.boundary_id + "'");
    const double ratio = peak_max / p;
    Hydrograph out = h;
    for (double& v : out.q) v *= ratio;
    return out;
}

std::vector<std::vector<Hydrograph>> generate_synthetic_set(const std::vector<Hydrograph>& bases,
                                                            const std::vector<std::vector<double>>& peaks,
                                                            bool enforce_main_river_dominance) {
    if (bases.size() != peaks.size())
        throw validation_error("generate_synthetic_set: need one peak list per base hydrograph");
    if (bases.empty()) throw validation_error("generate_synthetic_set: no base hydrographs");
    const size_t nscen = peaks.front().size();
    if (nscen == 0) throw validation_error("generate_synthetic_set: empty peak list");
    for (const auto& pl : peaks)
        if (pl.size() != nscen)
            throw validation_error("generate_synthetic_set: peak lists must have equal length across boundaries");

    if (enforce_main_river_dominance) {
        for (size_t k = 0; k < nscen; ++k) {
            for (size_t b = 1; b < peaks.size(); ++b) {
                if (!(peaks[0][k] > peaks[b][k]))
                    throw validation_error("generate_synthetic_set: main-river peak " + format_double(peaks[0][k]) +
                                           " does not dominate tributary '" + bases[b].boundary_id + "' peak " +
                                           format_double(peaks[b][k]) + " in scenario " + std::to_string(k + 1));
            }
        }
    }

    std::vector<std::vector<Hydrograph>> scenarios(nscen);
    for (size_t k = 0; k < nscen; ++k) {
        scenarios[k].reserve(bases.size());
        for (size_t b = 0; b < bases.size(); ++b) scenarios[k].push_back(scale_to_peak(bases[b], peaks[b][k]));
    }
    return scenarios;
}

Hydrograph resample_hydrograph(const Hydrograph& h, double dt_hours, size_t n) {
    h.validate();
    if (!(dt_hours > 0) || n == 0) throw validation_error("resample_hydrograph: need positive dt and length");
    Hydrograph out;
    out.boundary_id = h.boundary_id;
    out.t0 = 0.0;
    out.dt = dt_hours;
    out.q.resize(n);
    for (size_t i = 0; i < n; ++i) out.q[i] = h.discharge_at_hours(dt_hours * static_cast<double>(i));
    return out;
}

}  // namespace flood
