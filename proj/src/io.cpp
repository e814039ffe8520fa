#include "spinchi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace spinchi {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw CsvError(context + ": not a number: '" + t + "'");
    return value;
}

int parse_int(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw CsvError(context + ": not an integer: '" + t + "'");
    return value;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

std::string resolve_output_path(const std::string& path) {
    const char* dir = std::getenv("SPINCHI_OUTDIR");
    if (dir == nullptr || *dir == '\0') return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

Material RunConfig::material() const {
    Material m = spin_ice_material(x, g_parallel, A_K, DeltaDistribution(distribution));
    m.number_density_per_m3 = number_density_per_m3;
    return m;
}

ResponseKind RunConfig::response_kind() const {
    ResponseKind k = response_kind_from_string(kind);
    if (k == ResponseKind::isolated && probe_mT > 0.0)
        k = ResponseKind::isolated_finite_amplitude;
    return k;
}

PopulationScheme RunConfig::scheme() const {
    if (populations == "boltzmann") return PopulationScheme::boltzmann();
    if (populations == "frozen")
        return PopulationScheme::frozen(prep_B_mT * 1e-3, prep_T_K);
    throw ConfigError("run.populations must be 'boltzmann' or 'frozen', got '" +
                      populations + "'");
}

std::vector<double> RunConfig::field_grid_T() const {
    std::vector<double> grid(grid_points);
    for (int i = 0; i < grid_points; ++i)
        grid[i] = (bmin_mT + (bmax_mT - bmin_mT) * i / (grid_points - 1)) * 1e-3;
    return grid;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& key, const std::string& why) {
        throw ConfigError("invalid value for " + key + ": " + why);
    };
    if (!(x > 0.0) || x > 2.0) fail("material.x", "must be in (0, 2]");
    if (!(g_parallel > 0.0)) fail("material.g_parallel", "must be > 0");
    if (!(A_K > 0.0)) fail("material.A_K", "must be > 0");
    if (number_density_per_m3 && !(*number_density_per_m3 > 0.0))
        fail("material.number_density_per_m3", "must be > 0");
    if (grid_points < 2) fail("grid.points", "must be >= 2");
    if (!(bmin_mT < bmax_mT)) fail("grid.bmin_mT", "must be < grid.bmax_mT");
    if (!(temperature_K > 0.0)) fail("run.T_K", "must be > 0");
    if (populations == "frozen" && !(prep_T_K > 0.0))
        fail("run.prep_T_K", "must be > 0");
    if (populations != "boltzmann" && populations != "frozen")
        fail("run.populations", "must be 'boltzmann' or 'frozen'");
    if (probe_mT < 0.0) fail("run.probe_mT", "must be >= 0");
    response_kind_from_string(kind);
    DeltaDistribution check(distribution);
    (void)check;
}

std::vector<std::pair<std::string, std::string>> RunConfig::provenance() const {
    std::vector<std::pair<std::string, std::string>> p;
    p.emplace_back("material.x", format_double(x));
    p.emplace_back("material.g_parallel", format_double(g_parallel));
    p.emplace_back("material.A_K", format_double(A_K));
    for (std::size_t i = 0; i < distribution.size(); ++i) {
        const std::string n = std::to_string(i + 1);
        p.emplace_back("distribution.delta" + n + "_K", format_double(distribution[i].gap_K));
        p.emplace_back("distribution.f" + n, format_double(distribution[i].weight));
    }
    p.emplace_back("run.T_K", format_double(temperature_K));
    p.emplace_back("run.kind", kind);
    p.emplace_back("run.populations", populations);
    if (populations == "frozen") {
        p.emplace_back("run.prep_B_mT", format_double(prep_B_mT));
        p.emplace_back("run.prep_T_K", format_double(prep_T_K));
    }
    p.emplace_back("run.probe_mT", format_double(probe_mT));
    return p;
}

void apply_key(RunConfig& config, const std::string& key, const std::string& value,
               const std::string& context) {
    auto number = [&] {
        try {
            return parse_number(value, context);
        } catch (const CsvError& e) {
            throw ConfigError(std::string(e.what()) + " (key " + key + ")");
        }
    };
    auto resize_distribution = [&](std::size_t n) {
        if (config.distribution.size() < n) config.distribution.resize(n);
    };

    if (key == "material.x") config.x = number();
    else if (key == "material.g_parallel") config.g_parallel = number();
    else if (key == "material.A_K") config.A_K = number();
    else if (key == "material.number_density_per_m3") config.number_density_per_m3 = number();
    else if (key == "grid.bmin_mT") config.bmin_mT = number();
    else if (key == "grid.bmax_mT") config.bmax_mT = number();
    else if (key == "grid.points") {
        try {
            config.grid_points = parse_int(value, context);
        } catch (const CsvError& e) {
            throw ConfigError(std::string(e.what()) + " (key " + key + ")");
        }
    } else if (key == "run.T_K") config.temperature_K = number();
    else if (key == "run.kind") config.kind = trim(value);
    else if (key == "run.populations") config.populations = trim(value);
    else if (key == "run.prep_B_mT") config.prep_B_mT = number();
    else if (key == "run.prep_T_K") config.prep_T_K = number();
    else if (key == "run.probe_mT") config.probe_mT = number();
    else if (key == "io.out") config.out_path = trim(value);
    else if (key == "io.data") config.data_path = trim(value);
    else if (key.starts_with("distribution.delta") && key.ends_with("_K")) {
        const std::string idx = key.substr(18, key.size() - 20);
        const int n = parse_int(idx, context + " (key " + key + ")");
        if (n < 1 || n > 8) throw ConfigError(context + ": distribution index out of range: " + key);
        resize_distribution(n);
        config.distribution[n - 1].gap_K = number();
    } else if (key.starts_with("distribution.f")) {
        const std::string idx = key.substr(14);
        const int n = parse_int(idx, context + " (key " + key + ")");
        if (n < 1 || n > 8) throw ConfigError(context + ": distribution index out of range: " + key);
        resize_distribution(n);
        config.distribution[n - 1].weight = number();
    } else {
        throw ConfigError(context + ": unknown key '" + key + "'");
    }
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    RunConfig config;
    std::map<std::string, int> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string context = path + ":" + std::to_string(line_no);
        std::string body = line;
        const auto hash = body.find('#');
        if (hash != std::string::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(context + ": expected 'key = value', got '" + body + "'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError(context + ": empty key");
        if (auto it = seen.find(key); it != seen.end())
            config.warnings.push_back(context + ": duplicate key '" + key +
                                      "' (first set on line " + std::to_string(it->second) +
                                      "); last value wins");
        seen[key] = line_no;
        try {
            apply_key(config, key, value, context);
        } catch (const CsvError& e) {
            throw ConfigError(std::string(e.what()));
        }
    }
    try {
        config.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config;
}

SpectrumFile read_spectrum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open spectrum file: " + path);
    SpectrumFile out;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    int n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string context = path + ":" + std::to_string(line_no);
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        if (!have_header) {
            const auto cells = split_csv(body);
            if (cells.size() == 2 && cells[0] == "B_mT" && cells[1] == "chi_real") {
                n_cols = 2;
            } else if (cells.size() == 3 && cells[0] == "B_mT" &&
                       cells[1] == "chi_real" && cells[2] == "chi_imag") {
                n_cols = 3;
                out.has_imag = true;
            } else {
                throw CsvError(context + ": expected header 'B_mT,chi_real[,chi_imag]'");
            }
            have_header = true;
            continue;
        }
        const auto cells = split_csv(body);
        if (static_cast<int>(cells.size()) != n_cols)
            throw CsvError(context + ": expected " + std::to_string(n_cols) +
                           " columns, got " + std::to_string(cells.size()));
        const int row = static_cast<int>(out.field_mT.size()) + 1;
        auto cell_ctx = [&](int col) {
            return context + " (row " + std::to_string(row) + ", column " +
                   std::to_string(col + 1) + ")";
        };
        const double b = parse_number(cells[0], cell_ctx(0));
        const double re = parse_number(cells[1], cell_ctx(1));
        if (!std::isfinite(b) || !std::isfinite(re))
            throw CsvError(cell_ctx(0) + ": values must be finite");
        if (!out.field_mT.empty() && !(b > out.field_mT.back()))
            throw CsvError(context + ": field column must be strictly increasing "
                           "(row " + std::to_string(row) + ")");
        out.field_mT.push_back(b);
        out.chi_real.push_back(re);
        if (out.has_imag) {
            const double im = parse_number(cells[2], cell_ctx(2));
            if (!std::isfinite(im)) throw CsvError(cell_ctx(2) + ": values must be finite");
            out.chi_imag.push_back(im);
        }
    }
    if (!have_header) throw CsvError(path + ": empty file");
    if (out.field_mT.empty()) throw CsvError(path + ": no data rows");
    return out;
}

ResponseCurve to_curve(const SpectrumFile& file, ResponseKind kind) {
    ResponseCurve curve;
    curve.kind = kind;
    curve.field_T.reserve(file.field_mT.size());
    for (double b : file.field_mT) curve.field_T.push_back(b * 1e-3);
    curve.value = file.chi_real;
    return curve;
}

void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<double>>& columns,
                 const std::vector<std::pair<std::string, std::string>>& provenance) {
    std::ofstream outf(path, std::ios::binary); // fixed newlines on every platform
    if (!outf) throw CsvError("cannot open output file: " + path);
    outf << "# spinchi 1.0\n# provenance:\n";
    for (const auto& [k, v] : provenance) outf << "#   " << k << " = " << v << "\n";
    outf << header << "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) outf << ",";
            outf << format_double(columns[c][r]);
        }
        outf << "\n";
    }
    if (!outf) throw CsvError("write failed: " + path);
}

void write_curve(const ResponseCurve& curve, const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& provenance) {
    auto p = provenance;
    p.emplace_back("curve.kind", to_string(curve.kind));
    p.emplace_back("curve.units", curve.units == CurveUnits::per_ion
                                      ? "per-ion (mu_B^2/k_B per K)"
                                      : "SI volume (dimensionless)");
    p.emplace_back("curve.populations", curve.populations);
    std::vector<double> field_mT;
    field_mT.reserve(curve.field_T.size());
    for (double b : curve.field_T) field_mT.push_back(b * 1e3);
    write_table(path, "B_mT,chi_real", {field_mT, curve.value}, p);
}

std::vector<std::pair<double, double>> read_curie_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open file: " + path);
    std::vector<std::pair<double, double>> out;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string context = path + ":" + std::to_string(line_no);
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        const auto cells = split_csv(body);
        if (!have_header) {
            if (cells.size() != 2 || cells[0] != "T_K" || cells[1] != "chi")
                throw CsvError(context + ": expected header 'T_K,chi'");
            have_header = true;
            continue;
        }
        if (cells.size() != 2) throw CsvError(context + ": expected 2 columns");
        out.emplace_back(parse_number(cells[0], context), parse_number(cells[1], context));
    }
    if (!have_header) throw CsvError(path + ": empty file");
    if (out.empty()) throw CsvError(path + ": no data rows");
    return out;
}

} // namespace spinchi
