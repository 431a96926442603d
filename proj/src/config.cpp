#include "flood/config.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

namespace flood {

void ExperimentConfig::validate() const {
    if (dem_path.empty()) throw validation_error("config: dem_path is required");
    if (resolutions.empty()) throw validation_error("config: at least one resolution is required");
    if (dem_types.empty()) throw validation_error("config: at least one dem_type is required");
    for (const auto& t : dem_types)
        if (t != "DTM" && t != "DSM") throw validation_error("config: dem_types must be DTM or DSM, got '" + t + "'");
    if (std::find(dem_types.begin(), dem_types.end(), "DSM") != dem_types.end()) {
        if (buildings_path.empty()) throw validation_error("config: DSM requested but buildings_path is missing");
        if (!(burn_height_m > 0)) throw validation_error("config: DSM requested but burn_height_m is not positive");
    }
    if (boundaries.empty()) throw validation_error("config: at least one boundary is required");
    const size_t nscen = boundaries.front().peaks.size();
    for (const auto& b : boundaries) {
        if (b.id.empty()) throw validation_error("config: boundary id must not be empty");
        if (b.base_hydrograph_path.empty())
            throw validation_error("config: boundary '" + b.id + "' has no base_hydrograph");
        if (b.test_hydrograph_path.empty())
            throw validation_error("config: boundary '" + b.id + "' has no test_hydrograph");
        if (b.peaks.empty()) throw validation_error("config: boundary '" + b.id + "' has no peaks");
        if (b.peaks.size() != nscen)
            throw validation_error("config: peak lists must have equal length across boundaries");
    }
    solver.validate();
    if (!(duration_h > 0)) throw validation_error("config: duration_h must be positive");
    if (n_ts < 0) throw validation_error("config: n_ts must be non-negative");
    train.validate();
    if (stages.empty()) throw validation_error("config: at least one stage is required");
    for (int s : stages) {
        if (s < 0) throw validation_error("config: stages must be non-negative");
        if (s * solver.output_interval > duration_h * 3600.0 + 1e-6)
            throw validation_error("config: duration does not cover stage step " + std::to_string(s));
    }
    if (!(wet_threshold >= 0)) throw validation_error("config: wet_threshold must be non-negative");
    if (output_dir.empty()) throw validation_error("config: output_dir is required");
}

namespace {

std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split(value, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) continue;
        out.push_back(parse_double(t, what));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& value, const std::string& what) {
    std::vector<int> out;
    for (const auto& tok : split(value, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) continue;
        out.push_back(static_cast<int>(parse_long(t, what)));
    }
    return out;
}

bool parse_bool(const std::string& value, const std::string& what) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw parse_error("config: invalid boolean for " + what + ": '" + value + "'");
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (path.empty()) return path;
    std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin,
                                         const std::string& base_dir) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    BoundaryConfig* boundary = nullptr;
    size_t lineno = 0;

    auto fail = [&](const std::string& msg) -> void {
        throw parse_error(origin + ":" + std::to_string(lineno) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') fail("unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            boundary = nullptr;
            if (section.rfind("boundary.", 0) == 0) {
                BoundaryConfig b;
                b.id = section.substr(9);
                if (b.id.empty()) fail("boundary section needs an id: [boundary.<id>]");
                cfg.boundaries.push_back(b);
                boundary = &cfg.boundaries.back();
            } else if (section != "solver" && section != "surrogate" && section != "eval") {
                fail("unknown section [" + section + "]");
            }
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));

        if (boundary) {
            if (key == "x") boundary->x = parse_double(value, key);
            else if (key == "y") boundary->y = parse_double(value, key);
            else if (key == "base_hydrograph") boundary->base_hydrograph_path = resolve_path(base_dir, value);
            else if (key == "test_hydrograph") boundary->test_hydrograph_path = resolve_path(base_dir, value);
            else if (key == "peaks") boundary->peaks = parse_double_list(value, key);
            else fail("unknown boundary key '" + key + "'");
        } else if (section == "solver") {
            if (key == "manning_n") cfg.solver.manning_n = parse_double(value, key);
            else if (key == "alpha") cfg.solver.alpha = parse_double(value, key);
            else if (key == "dt_max") cfg.solver.dt_max = parse_double(value, key);
            else if (key == "h_wet") cfg.solver.h_wet = parse_double(value, key);
            else if (key == "output_interval_s") cfg.solver.output_interval = parse_double(value, key);
            else if (key == "duration_h") cfg.duration_h = parse_double(value, key);
            else fail("unknown solver key '" + key + "'");
        } else if (section == "surrogate") {
            if (key == "n_ts") cfg.n_ts = static_cast<int>(parse_long(value, key));
            else if (key == "learning_rate") cfg.train.learning_rate = parse_double(value, key);
            else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(parse_long(value, key));
            else if (key == "dropout_p") cfg.train.dropout_p = parse_double(value, key);
            else if (key == "patience") cfg.train.patience = static_cast<int>(parse_long(value, key));
            else if (key == "min_delta") cfg.train.min_delta = parse_double(value, key);
            else if (key == "max_epochs") cfg.train.max_epochs = static_cast<int>(parse_long(value, key));
            else if (key == "val_fraction") cfg.train.val_fraction = parse_double(value, key);
            else fail("unknown surrogate key '" + key + "'");
        } else if (section == "eval") {
            if (key == "stages") cfg.stages = parse_int_list(value, key);
            else if (key == "wet_threshold") cfg.wet_threshold = parse_double(value, key);
            else if (key == "stations_path") cfg.stations_path = resolve_path(base_dir, value);
            else fail("unknown eval key '" + key + "'");
        } else {
            if (key == "dem_path") cfg.dem_path = resolve_path(base_dir, value);
            else if (key == "buildings_path") cfg.buildings_path = resolve_path(base_dir, value);
            else if (key == "burn_height_m") cfg.burn_height_m = parse_double(value, key);
            else if (key == "resolutions") cfg.resolutions = parse_double_list(value, key);
            else if (key == "dem_types") {
                cfg.dem_types.clear();
                for (const auto& tok : split(value, ','))
                    if (!trim(tok).empty()) cfg.dem_types.push_back(trim(tok));
            } else if (key == "output_dir") cfg.output_dir = value;  // cwd-relative: it is an output
            else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(value, key));
            else if (key == "enforce_main_river_dominance") cfg.enforce_main_river_dominance = parse_bool(value, key);
            else fail("unknown key '" + key + "'");
        }
    }
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    return parse_experiment_config(read_text_file(path), path, base_dir.empty() ? "." : base_dir);
}

std::string experiment_config_echo(const ExperimentConfig& cfg) {
    std::string out;
    out += "dem_path = " + cfg.dem_path + "\n";
    if (!cfg.buildings_path.empty()) out += "buildings_path = " + cfg.buildings_path + "\n";
    out += "burn_height_m = " + format_double(cfg.burn_height_m) + "\n";
    out += "resolutions = ";
    for (size_t i = 0; i < cfg.resolutions.size(); ++i)
        out += (i ? "," : "") + format_double(cfg.resolutions[i]);
    out += "\ndem_types = ";
    for (size_t i = 0; i < cfg.dem_types.size(); ++i) out += (i ? "," : "") + cfg.dem_types[i];
    out += "\noutput_dir = " + cfg.output_dir + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    out += "enforce_main_river_dominance = " + std::string(cfg.enforce_main_river_dominance ? "true" : "false") +
           "\n";
    out += "\n[solver]\n";
    out += "manning_n = " + format_double(cfg.solver.manning_n) + "\n";
    out += "alpha = " + format_double(cfg.solver.alpha) + "\n";
    out += "dt_max = " + format_double(cfg.solver.dt_max) + "\n";
    out += "h_wet = " + format_double(cfg.solver.h_wet) + "\n";
    out += "output_interval_s = " + format_double(cfg.solver.output_interval) + "\n";
    out += "duration_h = " + format_double(cfg.duration_h) + "\n";
    out += "\n[surrogate]\n";
    out += "n_ts = " + std::to_string(cfg.n_ts) + "\n";
    out += "learning_rate = " + format_double(cfg.train.learning_rate) + "\n";
    out += "batch_size = " + std::to_string(cfg.train.batch_size) + "\n";
    out += "dropout_p = " + format_double(cfg.train.dropout_p) + "\n";
    out += "patience = " + std::to_string(cfg.train.patience) + "\n";
    out += "min_delta = " + format_double(cfg.train.min_delta) + "\n";
    out += "max_epochs = " + std::to_string(cfg.train.max_epochs) + "\n";
    out += "val_fraction = " + format_double(cfg.train.val_fraction) + "\n";
    out += "\n[eval]\n";
    out += "stages = ";
    for (size_t i = 0; i < cfg.stages.size(); ++i) out += (i ? "," : "") + std::to_string(cfg.stages[i]);
    out += "\nwet_threshold = " + format_double(cfg.wet_threshold) + "\n";
    if (!cfg.stations_path.empty()) out += "stations_path = " + cfg.stations_path + "\n";
    for (const auto& b : cfg.boundaries) {
        out += "\n[boundary." + b.id + "]\n";
        out += "x = " + format_double(b.x) + "\n";
        out += "y = " + format_double(b.y) + "\n";
        out += "base_hydrograph = " + b.base_hydrograph_path + "\n";
        out += "peaks = ";
        for (size_t i = 0; i < b.peaks.size(); ++i) out += (i ? "," : "") + format_double(b.peaks[i]);
        out += "\ntest_hydrograph = " + b.test_hydrograph_path + "\n";
    }
    return out;
}

}  // namespace flood
