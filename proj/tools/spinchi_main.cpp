// spinchi: susceptibilities of dilute hyperfine-split Ising spins.
// Subcommands compute level diagrams, susceptibility curves and sample
// spectra, and fit measured spectra for the hyperfine constant, gap-
// distribution weights, Curie parameters and state populations.
//
// Exit codes: 0 success, 1 computation/fit error, 2 usage error.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinchi/fitting.hpp"
#include "spinchi/io.hpp"

using namespace spinchi;

namespace {

// flag values parsed by CLI11; applied over the config file only when the
// flag was actually given (flag > config file > built-in default)
struct Flags {
    std::string config_path;
    double x = 0.0, g = 0.0, A = 0.0, T = 0.0;
    std::string kind, populations;
    double prep_B_mT = 0.0, prep_T_K = 0.0, probe_mT = 0.0;
    double bmin_mT = 0.0, bmax_mT = 0.0;
    int n = 0;
};

void add_material_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config_path, "configuration file (key = value)");
    cmd->add_option("--x", f.x, "ion concentration per formula unit");
    cmd->add_option("--g", f.g, "parallel g-factor");
    cmd->add_option("--A", f.A, "hyperfine constant, K");
    cmd->add_option("--T", f.T, "temperature, K");
    cmd->add_option("--kind", f.kind, "isothermal|adiabatic|isolated|isolated_kubo");
    cmd->add_option("--populations", f.populations, "boltzmann|frozen");
    cmd->add_option("--prep-B-mT", f.prep_B_mT, "freezing field, mT");
    cmd->add_option("--prep-T-K", f.prep_T_K, "freezing temperature, K");
    cmd->add_option("--probe-mT", f.probe_mT, "probe amplitude, mT");
    cmd->add_option("--bmin-mT", f.bmin_mT, "grid start, mT");
    cmd->add_option("--bmax-mT", f.bmax_mT, "grid end, mT");
    cmd->add_option("--n", f.n, "grid points");
}

RunConfig make_config(CLI::App* cmd, const Flags& f) {
    RunConfig c;
    if (!f.config_path.empty()) c = parse_config(f.config_path);
    for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
    if (cmd->count("--x")) c.x = f.x;
    if (cmd->count("--g")) c.g_parallel = f.g;
    if (cmd->count("--A")) c.A_K = f.A;
    if (cmd->count("--T")) c.temperature_K = f.T;
    if (cmd->count("--kind")) c.kind = f.kind;
    if (cmd->count("--populations")) c.populations = f.populations;
    if (cmd->count("--prep-B-mT")) c.prep_B_mT = f.prep_B_mT;
    if (cmd->count("--prep-T-K")) c.prep_T_K = f.prep_T_K;
    if (cmd->count("--probe-mT")) c.probe_mT = f.probe_mT;
    if (cmd->count("--bmin-mT")) c.bmin_mT = f.bmin_mT;
    if (cmd->count("--bmax-mT")) c.bmax_mT = f.bmax_mT;
    if (cmd->count("--n")) c.grid_points = f.n;
    c.validate();
    return c;
}

void emit_curve(const RunConfig& config, const ResponseCurve& curve,
                const std::string& out) {
    const std::string path = resolve_output_path(out);
    write_curve(curve, path, config.provenance());
    std::cerr << "wrote " << path << " (" << curve.value.size() << " points)\n";
}

void print_fit(const FitResult& fit) {
    for (const auto& [name, value] : fit.parameters) {
        std::cout << name << " = " << format_double(value);
        if (auto it = fit.standard_errors.find(name); it != fit.standard_errors.end())
            std::cout << " +- " << format_double(it->second);
        std::cout << "\n";
    }
    if (fit.scale) std::cout << "scale = " << format_double(*fit.scale) << "\n";
    std::cout << "residual_norm = " << format_double(fit.residual_norm) << "\n";
    std::cout << "model: " << fit.model_description << "\n";
}

int run_levels(const RunConfig& c, double delta_K, double nuclear_I,
               double projection, const std::string& out) {
    const SpinSpecies species = hyperfine_species(0.5 * c.g_parallel, c.A_K, delta_K,
                                                  projection, nuclear_I);
    const auto grid = c.field_grid_T();
    const auto labels = state_labels(species);
    std::vector<std::vector<double>> columns(1 + labels.size());
    std::string header = "B_mT";
    for (const auto& label : labels)
        header += ",E_m" + format_double(label.m_I) +
                  (label.branch == Branch::plus ? "_plus_K" : "_minus_K");
    for (double b : grid) {
        columns[0].push_back(b * 1e3);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const auto [ep, em] = block_energies(species, labels[i].m_I, b);
            columns[1 + i].push_back(labels[i].branch == Branch::plus ? ep : em);
        }
    }
    auto prov = c.provenance();
    prov.emplace_back("levels.delta_K", format_double(delta_K));
    prov.emplace_back("levels.nuclear_I", format_double(nuclear_I));
    prov.emplace_back("levels.projection", format_double(projection));
    write_table(resolve_output_path(out), header, columns, prov);
    std::cerr << "wrote " << resolve_output_path(out) << "\n";
    return 0;
}

int run_chi(const RunConfig& c, const std::string& species_kind, double delta_K,
            const std::string& out) {
    SpinSpecies species;
    if (species_kind == "apical")
        species = hyperfine_species(0.5 * c.g_parallel, c.A_K, delta_K, 1.0, 3.5, 1);
    else if (species_kind == "basal")
        species = hyperfine_species(0.5 * c.g_parallel, c.A_K, delta_K, 1.0 / 3.0, 3.5, 3);
    else if (species_kind == "two-state")
        species = two_state_species(0.5 * c.g_parallel, delta_K);
    else
        throw ConfigError("--species must be apical, basal or two-state");
    ResponseCurve curve = species_curve(species, c.field_grid_T(), c.response_kind(),
                                        c.temperature_K, c.scheme(), c.probe_mT * 1e-3);
    curve.species_id = species_kind;
    if (c.number_density_per_m3) curve = to_si(curve, *c.number_density_per_m3);
    emit_curve(c, curve, out);
    return 0;
}

int run_spectrum(const RunConfig& c, const std::string& out) {
    ResponseCurve curve = total_spectrum(c.material(), c.field_grid_T(), c.temperature_K,
                                         c.response_kind(), c.scheme(), c.probe_mT * 1e-3);
    if (c.number_density_per_m3) curve = to_si(curve, *c.number_density_per_m3);
    emit_curve(c, curve, out);
    return 0;
}

int run_plateau(double chi_T, double chi_S, double chi_I, double tau1, double tau2,
                double wmin, double wmax, int n, const std::string& out) {
    if (n < 2 || !(wmin > 0.0) || !(wmax > wmin))
        throw ConfigError("need n >= 2 and 0 < wmin < wmax");
    std::vector<std::vector<double>> columns(3);
    for (int i = 0; i < n; ++i) {
        const double w = wmin * std::pow(wmax / wmin, static_cast<double>(i) / (n - 1));
        const auto chi = plateau_model(chi_T, chi_S, chi_I, tau1, tau2, w);
        columns[0].push_back(w);
        columns[1].push_back(chi.real());
        columns[2].push_back(chi.imag());
    }
    const std::vector<std::pair<std::string, std::string>> prov = {
        {"plateau.chi_T", format_double(chi_T)}, {"plateau.chi_S", format_double(chi_S)},
        {"plateau.chi_I", format_double(chi_I)}, {"plateau.tau1_s", format_double(tau1)},
        {"plateau.tau2_s", format_double(tau2)}};
    write_table(resolve_output_path(out), "omega_rad_per_s,chi_real,chi_imag", columns, prov);
    std::cerr << "wrote " << resolve_output_path(out) << "\n";
    return 0;
}

int run_fit_peaks(const RunConfig& c, const std::string& data_path,
                  double min_prominence, bool fit_A) {
    const auto data = to_curve(read_spectrum(data_path), ResponseKind::isolated);
    const auto peaks = detect_peaks(data, min_prominence);
    std::cout << "field_mT,height,width_mT\n";
    for (const auto& p : peaks.peaks)
        std::cout << format_double(p.field_T * 1e3) << "," << format_double(p.height)
                  << "," << format_double(p.width_T * 1e3) << "\n";
    if (fit_A) print_fit(fit_hyperfine_A(peaks, 0.5 * c.g_parallel, 1.0));
    return 0;
}

// the imaginary column is never modeled, only reported against the real part
void report_imaginary(const SpectrumFile& file) {
    if (!file.has_imag) return;
    double max_im = 0.0, max_re = 0.0;
    for (double v : file.chi_imag) max_im = std::max(max_im, std::abs(v));
    for (double v : file.chi_real) max_re = std::max(max_re, std::abs(v));
    std::cout << "chi_imag diagnostic: max |chi_imag| / max |chi_real| = "
              << format_double(max_re > 0.0 ? max_im / max_re : 0.0) << "\n";
}

int run_fit_weights(const RunConfig& c, const std::string& data_path, bool fit_scale,
                    const std::string& out) {
    const auto file = read_spectrum(data_path);
    const auto data = to_curve(file, c.response_kind());
    const auto fit = fit_weights(data, c.material(), c.temperature_K,
                                 c.probe_mT * 1e-3, fit_scale);
    print_fit(fit);
    report_imaginary(file);
    if (!out.empty()) {
        RunConfig fitted = c;
        for (std::size_t i = 0; i < fitted.distribution.size(); ++i) {
            const auto it = fit.parameters.find("f" + std::to_string(i + 1));
            fitted.distribution[i].weight = it == fit.parameters.end() ? 0.0 : it->second;
        }
        ResponseCurve model = total_spectrum(fitted.material(), data.field_T,
                                             c.temperature_K, c.response_kind(),
                                             c.scheme(), c.probe_mT * 1e-3);
        if (fit.scale)
            for (double& v : model.value) v *= *fit.scale;
        emit_curve(fitted, model, out);
    }
    return 0;
}

int run_fit_curie(const RunConfig& c, const std::string& data_path) {
    const auto data = read_curie_data(data_path);
    print_fit(fit_curie(data, c.x));
    return 0;
}

int run_populations(const RunConfig& c, const std::string& data_path,
                    double min_prominence) {
    const auto file = read_spectrum(data_path);
    const auto data = to_curve(file, ResponseKind::isolated);
    const auto peaks = detect_peaks(data, min_prominence);
    report_imaginary(file);
    const auto inf = infer_populations(peaks, c.material());
    std::cout << "m_I,field_mT,height,delta_p\n";
    for (const auto& ch : inf.channels)
        std::cout << format_double(ch.abs_m_I) << ","
                  << format_double(ch.crossing_field_T * 1e3) << ","
                  << format_double(ch.peak_height) << ","
                  << format_double(ch.population_difference) << "\n";
    std::cout << "effective_T_K = " << format_double(inf.effective_temperature_K)
              << " +- " << format_double(inf.effective_temperature_se_K) << "\n";
    std::cout << "log_residual_norm = " << format_double(inf.log_residual_norm) << "\n";
    std::cout << "equilibrium_violating = " << (inf.equilibrium_violating ? "yes" : "no")
              << "\n";
    std::cout << "note: " << inf.description << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"susceptibilities of dilute hyperfine-split Ising spins"};
    app.require_subcommand(1);

    Flags flags;
    double delta_K = 0.015, nuclear_I = 3.5, projection = 1.0;
    std::string out, data_path, species_kind = "apical";
    double min_prominence = 0.05;
    bool fit_A = false, fit_scale = false;
    double chi_T = 1.0, chi_S = 0.5, chi_I = 0.2, tau1 = 1.0, tau2 = 1e-4;
    double wmin = 1e-3, wmax = 1e7;
    int n_omega = 701;

    auto* levels = app.add_subcommand("levels", "hyperfine level diagram vs field");
    add_material_flags(levels, flags);
    levels->add_option("--delta", delta_K, "gap Delta, K");
    levels->add_option("--I", nuclear_I, "nuclear spin");
    levels->add_option("--projection", projection, "field projection factor");
    levels->add_option("--out", out, "output CSV")->required();

    auto* chi = app.add_subcommand("chi", "single-species susceptibility curve");
    add_material_flags(chi, flags);
    chi->add_option("--species", species_kind, "apical|basal|two-state");
    chi->add_option("--delta", delta_K, "gap Delta, K");
    chi->add_option("--out", out, "output CSV")->required();

    auto* spectrum = app.add_subcommand("spectrum", "total sample spectrum");
    add_material_flags(spectrum, flags);
    spectrum->add_option("--out", out, "output CSV")->required();

    auto* plateau = app.add_subcommand("plateau", "double-Debye plateau interpolation");
    plateau->add_option("--chi-T", chi_T, "isothermal value")->required();
    plateau->add_option("--chi-S", chi_S, "adiabatic value")->required();
    plateau->add_option("--chi-I", chi_I, "isolated value")->required();
    plateau->add_option("--tau1", tau1, "spin-lattice time, s");
    plateau->add_option("--tau2", tau2, "spin-spin time, s");
    plateau->add_option("--wmin", wmin, "lowest angular frequency, rad/s");
    plateau->add_option("--wmax", wmax, "highest angular frequency, rad/s");
    plateau->add_option("--n-omega", n_omega, "frequency points");
    plateau->add_option("--out", out, "output CSV")->required();

    auto* fpeaks = app.add_subcommand("fit-peaks", "detect peaks, optionally refine A");
    add_material_flags(fpeaks, flags);
    fpeaks->add_option("--data", data_path, "measured spectrum CSV")->required();
    fpeaks->add_option("--min-prominence", min_prominence, "fraction of curve range");
    fpeaks->add_flag("--fit-A", fit_A, "refine the hyperfine constant from peaks");

    auto* fweights = app.add_subcommand("fit-weights", "fit gap-distribution weights");
    add_material_flags(fweights, flags);
    fweights->add_option("--data", data_path, "measured spectrum CSV")->required();
    fweights->add_flag("--fit-scale", fit_scale, "allow a free global amplitude");
    fweights->add_option("--out", out, "write the fitted model curve");

    auto* fcurie = app.add_subcommand("fit-curie", "Curie law fit of chi(T)");
    add_material_flags(fcurie, flags);
    fcurie->add_option("--data", data_path, "T_K,chi CSV")->required();

    auto* pops = app.add_subcommand("populations", "infer state populations from peaks");
    add_material_flags(pops, flags);
    pops->add_option("--data", data_path, "measured spectrum CSV")->required();
    pops->add_option("--min-prominence", min_prominence, "fraction of curve range");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (plateau->parsed())
            return run_plateau(chi_T, chi_S, chi_I, tau1, tau2, wmin, wmax, n_omega, out);
        CLI::App* active = app.get_subcommands().front();
        const RunConfig config = make_config(active, flags);
        if (levels->parsed()) return run_levels(config, delta_K, nuclear_I, projection, out);
        if (chi->parsed()) return run_chi(config, species_kind, delta_K, out);
        if (spectrum->parsed()) return run_spectrum(config, out);
        if (fpeaks->parsed()) return run_fit_peaks(config, data_path, min_prominence, fit_A);
        if (fweights->parsed()) return run_fit_weights(config, data_path, fit_scale, out);
        if (fcurie->parsed()) return run_fit_curie(config, data_path);
        if (pops->parsed()) return run_populations(config, data_path, min_prominence);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
