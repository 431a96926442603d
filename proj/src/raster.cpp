#include "flood/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace flood {

bool Grid::contains(double x, double y) const {
    return x >= xll && x <= xll + ncols * cellsize && y >= yll && y <= yll + nrows * cellsize;
}

void Grid::cell_of(double x, double y, int& r, int& c) const {
    c = static_cast<int>(std::floor((x - xll) / cellsize));
    int row_from_bottom = static_cast<int>(std::floor((y - yll) / cellsize));
    c = std::clamp(c, 0, ncols - 1);
    row_from_bottom = std::clamp(row_from_bottom, 0, nrows - 1);
    r = nrows - 1 - row_from_bottom;
}

size_t Grid::count_nodata() const {
    size_t n = 0;
    for (double v : values)
        if (is_nodata(v)) ++n;
    return n;
}

void Grid::validate(const std::string& what) const {
    if (ncols <= 0 || nrows <= 0) throw validation_error(what + ": grid dimensions must be positive");
    if (!(cellsize > 0)) throw validation_error(what + ": cellsize must be positive");
    if (values.size() != static_cast<size_t>(ncols) * nrows)
        throw validation_error(what + ": value count does not match nrows*ncols");
    for (double v : values)
        if (std::isnan(v)) throw validation_error(what + ": grid contains NaN (use the NODATA sentinel)");
}

Grid make_grid(int nrows, int ncols, double xll, double yll, double cellsize, double fill, double nodata) {
    Grid g;
    g.nrows = nrows;
    g.ncols = ncols;
    g.xll = xll;
    g.yll = yll;
    g.cellsize = cellsize;
    g.nodata = nodata;
    g.values.assign(static_cast<size_t>(nrows) * ncols, fill);
    return g;
}

bool aligned(const Grid& a, const Grid& b) {
    return a.ncols == b.ncols && a.nrows == b.nrows && a.xll == b.xll && a.yll == b.yll &&
           a.cellsize == b.cellsize;
}

void require_aligned(const Grid& a, const Grid& b, const std::string& op) {
    if (!aligned(a, b))
        throw validation_error(op + ": grids are not aligned (xll/yll/cellsize/ncols/nrows must match)");
}

// --- ESRI ASCII grid I/O --------------------------------------------------

namespace {

std::string lower(std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

}  // namespace

Grid parse_ascii_grid(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    Grid g;
    bool have[6] = {false, false, false, false, false, false};
    static const char* keys[6] = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"};

    // Header: six key/value lines in any order, keys case-insensitive.
    for (int i = 0; i < 6; ++i) {
        std::string key, val;
        if (!(in >> key >> val)) throw parse_error(origin + ": truncated header (expected 6 key/value lines)");
        std::string k = lower(key);
        int idx = -1;
        for (int j = 0; j < 6; ++j)
            if (k == keys[j]) idx = j;
        if (idx < 0) throw parse_error(origin + ": unknown header key '" + key + "'");
        if (have[idx]) throw parse_error(origin + ": duplicate header key '" + key + "'");
        have[idx] = true;
        switch (idx) {
            case 0: g.ncols = static_cast<int>(parse_long(val, "ncols")); break;
            case 1: g.nrows = static_cast<int>(parse_long(val, "nrows")); break;
            case 2: g.xll = parse_double(val, "xllcorner"); break;
            case 3: g.yll = parse_double(val, "yllcorner"); break;
            case 4: g.cellsize = parse_double(val, "cellsize"); break;
            case 5: g.nodata = parse_double(val, "NODATA_value"); break;
        }
    }
    if (g.ncols <= 0) throw parse_error(origin + ": header key 'ncols' must be positive");
    if (g.nrows <= 0) throw parse_error(origin + ": header key 'nrows' must be positive");
    if (!(g.cellsize > 0)) throw parse_error(origin + ": header key 'cellsize' must be positive");

    const size_t expected = static_cast<size_t>(g.ncols) * g.nrows;
    g.values.reserve(expected);
    std::string tok;
    while (in >> tok) {
        if (g.values.size() == expected)
            throw parse_error(origin + ": too many values (expected " + std::to_string(expected) + ")");
        g.values.push_back(parse_double(tok, "grid value"));
    }
    if (g.values.size() != expected)
        throw parse_error(origin + ": wrong value count (expected " + std::to_string(expected) + ", found " +
                          std::to_string(g.values.size()) + ")");
    g.validate(origin);
    return g;
}

Grid read_ascii_grid(const std::string& path) {
    return parse_ascii_grid(read_text_file(path), path);
}

std::string ascii_grid_to_string(const Grid& grid) {
    grid.validate("write_ascii_grid");
    std::string out;
    out.reserve(grid.values.size() * 8 + 128);
    out += "ncols " + std::to_string(grid.ncols) + "\n";
    out += "nrows " + std::to_string(grid.nrows) + "\n";
    out += "xllcorner " + format_double(grid.xll) + "\n";
    out += "yllcorner " + format_double(grid.yll) + "\n";
    out += "cellsize " + format_double(grid.cellsize) + "\n";
    const std::string nodata_token = format_double(grid.nodata);
    out += "NODATA_value " + nodata_token + "\n";
    for (int r = 0; r < grid.nrows; ++r) {
        for (int c = 0; c < grid.ncols; ++c) {
            if (c) out += ' ';
            double v = grid.at(r, c);
            // NODATA cells render exactly the header token.
            out += grid.is_nodata(v) ? nodata_token : format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_ascii_grid(const Grid& grid, const std::string& path) {
    write_text_file(path, ascii_grid_to_string(grid));
}

// --- Resampling -----------------------------------------------------------

Grid resample_bilinear(const Grid& src, double target_cellsize) {
    src.validate("resample_bilinear");
    if (!(target_cellsize > 0)) throw validation_error("resample_bilinear: target cellsize must be positive");
    if (target_cellsize < src.cellsize)
        throw validation_error("resample_bilinear: refusing to upsample (target " +
                               format_double(target_cellsize) + " m < source " + format_double(src.cellsize) +
                               " m)");
    if (src.ncols < 2 || src.nrows < 2)
        throw validation_error("resample_bilinear: source must be at least 2x2 cells");

    // Identity is bit-exact by construction.
    if (target_cellsize == src.cellsize) return src;

    const int out_cols = static_cast<int>(std::floor(src.ncols * src.cellsize / target_cellsize));
    const int out_rows = static_cast<int>(std::floor(src.nrows * src.cellsize / target_cellsize));
    if (out_cols < 1 || out_rows < 1)
        throw validation_error("resample_bilinear: empty overlap at target cellsize " +
                               format_double(target_cellsize) + " m");

    Grid out = make_grid(out_rows, out_cols, src.xll, src.yll, target_cellsize, 0.0, src.nodata);
    for (int r = 0; r < out_rows; ++r) {
        const double y = out.cell_center_y(r);
        // Position on the source cell-center lattice, measured from the bottom.
        double gy = (y - src.yll) / src.cellsize - 0.5;
        int j0 = static_cast<int>(std::floor(gy));
        double fy = gy - j0;
        if (j0 < 0) { j0 = 0; fy = 0.0; }
        if (j0 > src.nrows - 2) { j0 = src.nrows - 2; fy = 1.0; }
        const int r1 = src.nrows - 1 - j0;      // lower (southern) source row
        const int r0 = r1 - 1;                  // upper source row
        for (int c = 0; c < out_cols; ++c) {
            const double x = out.cell_center_x(c);
            double gx = (x - src.xll) / src.cellsize - 0.5;
            int i0 = static_cast<int>(std::floor(gx));
            double fx = gx - i0;
            if (i0 < 0) { i0 = 0; fx = 0.0; }
            if (i0 > src.ncols - 2) { i0 = src.ncols - 2; fx = 1.0; }

            const double v00 = src.at(r1, i0);      // lower-left
            const double v10 = src.at(r1, i0 + 1);  // lower-right
            const double v01 = src.at(r0, i0);      // upper-left
            const double v11 = src.at(r0, i0 + 1);  // upper-right
            if (src.is_nodata(v00) || src.is_nodata(v10) || src.is_nodata(v01) || src.is_nodata(v11)) {
                out.at(r, c) = out.nodata;
                continue;
            }
            const double bottom = v00 * (1.0 - fx) + v10 * fx;
            const double top = v01 * (1.0 - fx) + v11 * fx;
            out.at(r, c) = bottom * (1.0 - fy) + top * fy;
        }
    }
    return out;
}

// --- Building burning -----------------------------------------------------

namespace {

bool point_on_segment(double px, double py, double ax, double ay, double bx, double by) {
    const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    const double scale = std::max({std::abs(ax), std::abs(ay), std::abs(bx), std::abs(by), std::abs(px),
                                   std::abs(py), 1.0});
    if (std::abs(cross) > 1e-12 * scale * scale) return false;
    return px >= std::min(ax, bx) - 1e-12 * scale && px <= std::max(ax, bx) + 1e-12 * scale &&
           py >= std::min(ay, by) - 1e-12 * scale && py <= std::max(ay, by) + 1e-12 * scale;
}

}  // namespace

bool point_in_polygon(double x, double y, const Polygon& poly) {
    const auto& ring = poly.ring;
    const size_t n = ring.size();
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = ring[i].first, yi = ring[i].second;
        const double xj = ring[j].first, yj = ring[j].second;
        if (point_on_segment(x, y, xi, yi, xj, yj)) return true;  // boundary counts as inside
        if ((yi > y) != (yj > y)) {
            const double x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi;
            if (x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

void validate_buildings(const BuildingSet& buildings) {
    if (!(buildings.height > 0)) throw validation_error("burn_buildings: burn height must be positive");
    for (size_t p = 0; p < buildings.polygons.size(); ++p) {
        const auto& ring = buildings.polygons[p].ring;
        if (ring.size() < 4 || ring.front() != ring.back())
            throw validation_error("burn_buildings: polygon " + std::to_string(p) +
                                   " is not a closed ring (need >= 3 distinct vertices, first == last)");
        std::vector<std::pair<double, double>> distinct(ring.begin(), ring.end() - 1);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() < 3)
            throw validation_error("burn_buildings: polygon " + std::to_string(p) +
                                   " is degenerate (< 3 distinct vertices)");
    }
}

}  // namespace

Grid burn_buildings(const Grid& dtm, const BuildingSet& buildings) {
    dtm.validate("burn_buildings");
    validate_buildings(buildings);
    Grid out = dtm;
    for (const auto& poly : buildings.polygons) {
        double minx = poly.ring[0].first, maxx = minx, miny = poly.ring[0].second, maxy = miny;
        for (const auto& [px, py] : poly.ring) {
            minx = std::min(minx, px);
            maxx = std::max(maxx, px);
            miny = std::min(miny, py);
            maxy = std::max(maxy, py);
        }
        for (int r = 0; r < out.nrows; ++r) {
            const double cy = out.cell_center_y(r);
            if (cy < miny || cy > maxy) continue;
            for (int c = 0; c < out.ncols; ++c) {
                const double cx = out.cell_center_x(c);
                if (cx < minx || cx > maxx) continue;
                double& v = out.at(r, c);
                if (out.is_nodata(v)) continue;
                // Raise against the original terrain; overlapping polygons
                // must not stack.
                if (v != dtm.at(r, c)) continue;
                if (point_in_polygon(cx, cy, poly)) v = dtm.at(r, c) + buildings.height;
            }
        }
    }
    return out;
}

// --- Point sampling -------------------------------------------------------

std::vector<std::pair<std::string, std::optional<double>>> sample_at_points(const Grid& grid,
                                                                            const StationSet& stations) {
    grid.validate("sample_at_points");
    std::vector<std::pair<std::string, std::optional<double>>> out;
    out.reserve(stations.stations.size());
    for (const auto& st : stations.stations) {
        if (!grid.contains(st.x, st.y))
            throw validation_error("sample_at_points: station '" + st.name + "' at (" + format_double(st.x) +
                                   ", " + format_double(st.y) + ") is outside the grid extent");
        int r = 0, c = 0;
        grid.cell_of(st.x, st.y, r, c);
        const double v = grid.at(r, c);
        if (grid.is_nodata(v))
            out.emplace_back(st.name, std::nullopt);
        else
            out.emplace_back(st.name, v);
    }
    return out;
}

// --- Support file formats --------------------------------------------------

BuildingSet read_building_file(const std::string& path, double height) {
    BuildingSet set;
    set.height = height;
    std::istringstream in(read_text_file(path));
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        Polygon poly;
        for (const auto& pair_str : split(t, ',')) {
            std::istringstream ps(pair_str);
            double x, y;
            if (!(ps >> x >> y))
                throw parse_error(path + ":" + std::to_string(lineno) +
                                  ": expected comma-separated 'x y' vertex pairs");
            poly.ring.emplace_back(x, y);
        }
        if (poly.ring.size() >= 2 && poly.ring.front() != poly.ring.back()) poly.ring.push_back(poly.ring.front());
        set.polygons.push_back(std::move(poly));
    }
    return set;
}

StationSet read_station_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw parse_error(path + ": empty station file");
    auto header = split(trim(line), ',');
    if (header.size() < 3 || trim(header[0]) != "name" || trim(header[1]) != "x" || trim(header[2]) != "y")
        throw parse_error(path + ": station header must be 'name,x,y'");
    StationSet set;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto cols = split(t, ',');
        if (cols.size() != 3)
            throw parse_error(path + ":" + std::to_string(lineno) + ": expected 3 columns (name,x,y)");
        Station st;
        st.name = trim(cols[0]);
        st.x = parse_double(trim(cols[1]), "station x");
        st.y = parse_double(trim(cols[2]), "station y");
        set.stations.push_back(std::move(st));
    }
    return set;
}

}  // namespace flood
