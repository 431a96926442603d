#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flood/common.hpp"

namespace flood {

// Georeferenced single-band raster. Row 0 is the northernmost row, matching
// ESRI ASCII grid order. NODATA is a sentinel value, never NaN.
struct Grid {
    int ncols = 0;
    int nrows = 0;
    double xll = 0.0;       // lower-left corner easting (m)
    double yll = 0.0;       // lower-left corner northing (m)
    double cellsize = 1.0;  // square cells (m)
    double nodata = -9999.0;
    std::vector<double> values;  // row-major, nrows*ncols

    double& at(int r, int c) { return values[static_cast<size_t>(r) * ncols + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * ncols + c]; }
    bool is_nodata(double v) const { return v == nodata; }
    bool is_nodata_at(int r, int c) const { return at(r, c) == nodata; }

    double cell_center_x(int c) const { return xll + (c + 0.5) * cellsize; }
    double cell_center_y(int r) const { return yll + (nrows - r - 0.5) * cellsize; }

    // Extent covers [xll, xll + ncols*cellsize] x [yll, yll + nrows*cellsize];
    // boundary points count as inside.
    bool contains(double x, double y) const;
    // Cell containing (x, y); points on the far edges clamp to the last cell.
    void cell_of(double x, double y, int& r, int& c) const;

    size_t count_nodata() const;
    void validate(const std::string& what) const;  // throws validation_error
};

Grid make_grid(int nrows, int ncols, double xll, double yll, double cellsize, double fill = 0.0,
               double nodata = -9999.0);

// True iff both grids share xll, yll, cellsize, ncols, nrows exactly.
bool aligned(const Grid& a, const Grid& b);
// Throws validation_error naming the operation when not aligned.
void require_aligned(const Grid& a, const Grid& b, const std::string& op);

// One closed simple polygon ring; first and last vertex equal.
struct Polygon {
    std::vector<std::pair<double, double>> ring;
};

struct BuildingSet {
    std::vector<Polygon> polygons;
    double height = 0.0;  // uniform burn height (m), > 0
};

struct Station {
    std::string name;
    double x = 0.0;
    double y = 0.0;
};

struct StationSet {
    std::vector<Station> stations;
};

// --- ESRI ASCII grid I/O --------------------------------------------------

// Parses the 6-key header (case-insensitive) and nrows*ncols values.
Grid read_ascii_grid(const std::string& path);
void write_ascii_grid(const Grid& grid, const std::string& path);
// String form used by both the file writer and tests.
std::string ascii_grid_to_string(const Grid& grid);
Grid parse_ascii_grid(const std::string& text, const std::string& origin);

// --- Geoprocessing --------------------------------------------------------

// Coarsens (or identity-copies) to target_cellsize, anchored at the shared
// lower-left origin; output dims = floor(extent / target_cellsize). Each
// output value is the bilinear interpolation of the four surrounding source
// cell-center values at the output cell center; a stencil touching NODATA
// yields NODATA. target_cellsize < src.cellsize is refused.
Grid resample_bilinear(const Grid& src, double target_cellsize);

// DSM construction: +height on every non-NODATA cell whose center lies
// inside any polygon (even-odd rule, boundary counts as inside).
Grid burn_buildings(const Grid& dtm, const BuildingSet& buildings);

// Even-odd point-in-polygon with boundary-touching points inside.
bool point_in_polygon(double x, double y, const Polygon& poly);

// Nearest-cell sampling; NODATA cells yield an empty optional.
std::vector<std::pair<std::string, std::optional<double>>> sample_at_points(const Grid& grid,
                                                                            const StationSet& stations);

// Building file: one polygon per line, comma-separated "x y" vertex pairs.
BuildingSet read_building_file(const std::string& path, double height);
// Station file: CSV with header name,x,y.
StationSet read_station_csv(const std::string& path);

}  // namespace flood
