#include "flood/features.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flood {

FeatureMatrix build_feature_matrix(const std::vector<Hydrograph>& hydrographs, int n_ts) {
    if (hydrographs.empty()) throw validation_error("build_feature_matrix: no hydrographs");
    if (n_ts < 0) throw validation_error("build_feature_matrix: n_ts must be non-negative");
    const auto& first = hydrographs.front();
    for (const auto& h : hydrographs) {
        h.validate();
        if (h.t0 != first.t0 || h.dt != first.dt || h.q.size() != first.q.size())
            throw validation_error("build_feature_matrix: hydrograph '" + h.boundary_id +
                                   "' does not share the time base of '" + first.boundary_id + "'");
    }
    const long len = static_cast<long>(first.q.size());
    if (len <= n_ts)
        throw validation_error("build_feature_matrix: series length " + std::to_string(len) +
                               " must exceed n_ts " + std::to_string(n_ts));

    const long n_samples = len - n_ts;
    const long n_features = (n_ts + 1) * static_cast<long>(hydrographs.size()) + 1;
    FeatureMatrix out;
    out.X.resize(n_samples, n_features);
    out.sample_times_hours.resize(n_samples);
    for (long s = 0; s < n_samples; ++s) {
        const long i = s + n_ts;
        const double t = first.t0 + first.dt * static_cast<double>(i);
        out.sample_times_hours[static_cast<size_t>(s)] = t;
        long col = 0;
        out.X(s, col++) = t;
        for (const auto& h : hydrographs)
            for (long back = 0; back <= n_ts; ++back) out.X(s, col++) = h.q[static_cast<size_t>(i - back)];
    }
    return out;
}

std::vector<CellRef> build_cell_index(const Grid& dem) {
    std::vector<CellRef> index;
    index.reserve(dem.values.size());
    for (int r = 0; r < dem.nrows; ++r)
        for (int c = 0; c < dem.ncols; ++c)
            if (!dem.is_nodata_at(r, c)) index.push_back({r, c});
    return index;
}

TargetMatrix build_target_matrix(const DepthSeries& series, const std::vector<double>& sample_times_hours,
                                 const Grid& dem, double depth_threshold) {
    dem.validate("build_target_matrix");
    TargetMatrix out;
    out.cell_index = build_cell_index(dem);
    out.Y.resize(static_cast<long>(sample_times_hours.size()), static_cast<long>(out.cell_index.size()));

    for (size_t s = 0; s < sample_times_hours.size(); ++s) {
        const double t_seconds = sample_times_hours[s] * 3600.0;
        const DepthSnapshot* snap = nullptr;
        for (const auto& cand : series) {
            if (std::abs(cand.t - t_seconds) <= 1e-6) {
                snap = &cand;
                break;
            }
        }
        if (!snap)
            throw validation_error("build_target_matrix: no depth snapshot at t=" +
                                   format_double(sample_times_hours[s]) + " h");
        require_aligned(snap->depth, dem, "build_target_matrix");
        for (size_t j = 0; j < out.cell_index.size(); ++j) {
            double d = snap->depth.at(out.cell_index[j].row, out.cell_index[j].col);
            if (snap->depth.is_nodata(d) || d < depth_threshold) d = 0.0;
            out.Y(static_cast<long>(s), static_cast<long>(j)) = d;
        }
    }
    return out;
}

Normalizer fit_normalizer(const Matrix& train_x) {
    if (train_x.rows() == 0) throw validation_error("fit_normalizer: empty training matrix");
    Normalizer norm;
    const long nf = train_x.cols();
    norm.mean.resize(nf);
    norm.std.resize(nf);
    const double n = static_cast<double>(train_x.rows());
    for (long j = 0; j < nf; ++j) {
        const double mean = train_x.col(j).mean();
        const double var = (train_x.col(j).array() - mean).square().sum() / n;
        norm.mean[static_cast<size_t>(j)] = mean;
        norm.std[static_cast<size_t>(j)] = std::sqrt(var);
    }
    return norm;
}

Matrix apply_normalizer(const Normalizer& norm, const Matrix& x) {
    if (static_cast<size_t>(x.cols()) != norm.mean.size())
        throw validation_error("apply_normalizer: feature count mismatch");
    Matrix out = x;
    for (long j = 0; j < x.cols(); ++j) {
        const double mean = norm.mean[static_cast<size_t>(j)];
        const double sd = norm.std[static_cast<size_t>(j)];
        if (sd < 1e-12)
            out.col(j).array() -= mean;
        else
            out.col(j) = (x.col(j).array() - mean) / sd;
    }
    return out;
}

Grid scatter_to_grid(const Eigen::VectorXd& row, const std::vector<CellRef>& cell_index, const Grid& dem) {
    if (static_cast<size_t>(row.size()) != cell_index.size())
        throw validation_error("scatter_to_grid: vector length does not match cell index");
    Grid out = dem;
    std::fill(out.values.begin(), out.values.end(), out.nodata);
    for (size_t j = 0; j < cell_index.size(); ++j)
        out.at(cell_index[j].row, cell_index[j].col) = row(static_cast<long>(j));
    return out;
}

namespace {

std::string matrix_to_csv(const Matrix& m) {
    std::string out;
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            if (c) out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

Matrix csv_to_matrix(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty()) continue;
        auto cols = split(t, ',');
        std::vector<double> row;
        row.reserve(cols.size());
        for (const auto& c : cols) row.push_back(parse_double(c, origin));
        if (!rows.empty() && rows.front().size() != row.size())
            throw parse_error(origin + ": ragged rows");
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<long>(rows.size()), rows.empty() ? 0 : static_cast<long>(rows.front().size()));
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) m(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    return m;
}

constexpr char kYMagic[8] = {'F', 'L', 'D', 'Y', '0', '0', '0', '1'};

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir + "/X.csv", matrix_to_csv(ds.X));

    // Y.bin: magic, n_samples u64 LE, n_cells u64 LE, row-major f64 LE.
    std::ofstream out(dir + "/Y.bin", std::ios::binary);
    if (!out) throw io_error("cannot write " + dir + "/Y.bin");
    out.write(kYMagic, sizeof kYMagic);
    const std::uint64_t ns = static_cast<std::uint64_t>(ds.Y.rows());
    const std::uint64_t nc = static_cast<std::uint64_t>(ds.Y.cols());
    out.write(reinterpret_cast<const char*>(&ns), 8);
    out.write(reinterpret_cast<const char*>(&nc), 8);
    for (long r = 0; r < ds.Y.rows(); ++r)
        for (long c = 0; c < ds.Y.cols(); ++c) {
            const double v = ds.Y(r, c);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!out.good()) throw io_error("failed writing " + dir + "/Y.bin");
    out.close();

    std::string ci = "index,row,col\n";
    for (size_t j = 0; j < ds.cell_index.size(); ++j)
        ci += std::to_string(j) + "," + std::to_string(ds.cell_index[j].row) + "," +
              std::to_string(ds.cell_index[j].col) + "\n";
    write_text_file(dir + "/cell_index.csv", ci);

    std::string nm = "feature,mean,std\n";
    for (size_t j = 0; j < ds.norm.mean.size(); ++j)
        nm += std::to_string(j) + "," + format_double(ds.norm.mean[j]) + "," + format_double(ds.norm.std[j]) + "\n";
    write_text_file(dir + "/norm.csv", nm);

    std::string times = "t_hours\n";
    for (double t : ds.sample_times_hours) times += format_double(t) + "\n";
    write_text_file(dir + "/times.csv", times);
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.X = csv_to_matrix(read_text_file(dir + "/X.csv"), dir + "/X.csv");

    std::ifstream in(dir + "/Y.bin", std::ios::binary);
    if (!in) throw io_error("cannot open " + dir + "/Y.bin");
    char magic[8];
    in.read(magic, 8);
    if (!in.good() || std::memcmp(magic, kYMagic, 8) != 0)
        throw parse_error(dir + "/Y.bin: bad magic (not a dataset target file)");
    std::uint64_t ns = 0, nc = 0;
    in.read(reinterpret_cast<char*>(&ns), 8);
    in.read(reinterpret_cast<char*>(&nc), 8);
    if (!in.good()) throw parse_error(dir + "/Y.bin: truncated header");
    ds.Y.resize(static_cast<long>(ns), static_cast<long>(nc));
    for (std::uint64_t r = 0; r < ns; ++r)
        for (std::uint64_t c = 0; c < nc; ++c) {
            double v = 0;
            in.read(reinterpret_cast<char*>(&v), 8);
            if (!in.good()) throw parse_error(dir + "/Y.bin: truncated payload");
            ds.Y(static_cast<long>(r), static_cast<long>(c)) = v;
        }

    {
        std::istringstream ci(read_text_file(dir + "/cell_index.csv"));
        std::string line;
        std::getline(ci, line);
        while (std::getline(ci, line)) {
            std::string t = trim(line);
            if (t.empty()) continue;
            auto cols = split(t, ',');
            if (cols.size() != 3) throw parse_error(dir + "/cell_index.csv: expected 3 columns");
            ds.cell_index.push_back({static_cast<int>(parse_long(cols[1], "row")),
                                     static_cast<int>(parse_long(cols[2], "col"))});
        }
    }
    {
        std::istringstream nm(read_text_file(dir + "/norm.csv"));
        std::string line;
        std::getline(nm, line);
        while (std::getline(nm, line)) {
            std::string t = trim(line);
            if (t.empty()) continue;
            auto cols = split(t, ',');
            if (cols.size() != 3) throw parse_error(dir + "/norm.csv: expected 3 columns");
            ds.norm.mean.push_back(parse_double(cols[1], "mean"));
            ds.norm.std.push_back(parse_double(cols[2], "std"));
        }
    }
    {
        std::istringstream tm(read_text_file(dir + "/times.csv"));
        std::string line;
        std::getline(tm, line);
        while (std::getline(tm, line)) {
            std::string t = trim(line);
            if (t.empty()) continue;
            ds.sample_times_hours.push_back(parse_double(t, "t_hours"));
        }
    }
    return ds;
}

}  // namespace flood
