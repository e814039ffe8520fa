#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinchi/material.hpp"
#include "spinchi/response.hpp"

// Flat key = value configuration files, CSV spectrum files and deterministic
// number formatting.  Field axes are in millitesla in every file.
namespace spinchi {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // material
    double x = 0.0025;
    double g_parallel = 19.0;
    double A_K = 0.2945;
    std::optional<double> number_density_per_m3;
    std::vector<DeltaComponent> distribution = {{0.015, 0.511}, {0.1, 0.352}};
    // grid (millitesla)
    double bmin_mT = 0.0;
    double bmax_mT = 200.0;
    int grid_points = 2001;
    // run
    double temperature_K = 2.1;
    std::string kind = "isolated";
    std::string populations = "boltzmann"; // boltzmann | frozen
    double prep_B_mT = 0.0;
    double prep_T_K = 0.076;
    double probe_mT = 0.0; // 0 = quasi-static
    // io
    std::string out_path;
    std::string data_path;

    std::vector<std::string> warnings; // duplicate keys etc.

    Material material() const;
    ResponseKind response_kind() const; // probe > 0 promotes isolated to finite amplitude
    PopulationScheme scheme() const;
    std::vector<double> field_grid_T() const;
    void validate() const;
    // provenance entries describing this configuration
    std::vector<std::pair<std::string, std::string>> provenance() const;
};

// parses and validates; errors carry file:line and the offending key
RunConfig parse_config(const std::string& path);
void apply_key(RunConfig& config, const std::string& key, const std::string& value,
               const std::string& context);

struct SpectrumFile {
    std::vector<double> field_mT;
    std::vector<double> chi_real;
    std::vector<double> chi_imag; // empty unless the column is present
    bool has_imag = false;
};

// header `B_mT,chi_real[,chi_imag]`, '#' comments, strictly increasing field
SpectrumFile read_spectrum(const std::string& path);
ResponseCurve to_curve(const SpectrumFile& file, ResponseKind kind);

void write_curve(const ResponseCurve& curve, const std::string& path,
                 const std::vector<std::pair<std::string, std::string>>& provenance);

// generic deterministic CSV writing: provenance block, header, rows
void write_table(const std::string& path, const std::string& header,
                 const std::vector<std::vector<double>>& columns,
                 const std::vector<std::pair<std::string, std::string>>& provenance);

// `T_K,chi` files for Curie fits
std::vector<std::pair<double, double>> read_curie_data(const std::string& path);

// shortest representation that round-trips exactly
std::string format_double(double value);

// output-directory override: SPINCHI_OUTDIR is applied to relative paths
std::string resolve_output_path(const std::string& path);

} // namespace spinchi
