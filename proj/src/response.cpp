#include "spinchi/response.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinchi/constants.hpp"

namespace spinchi {

namespace {

constexpr double k_conv = constants::mu_B_per_k_B_K_per_T;

// energies, moments and reduced moment slopes of every level at one field
struct LevelTable {
    std::vector<double> energy_K;
    std::vector<double> moment_muB;
    std::vector<double> slope_reduced; // dm/dB / (mu_B/k_B), mu_B^2/K
};

LevelTable build_table(const SpinSpecies& species, double field_T) {
    const auto labels = state_labels(species);
    LevelTable t;
    t.energy_K.reserve(labels.size());
    t.moment_muB.reserve(labels.size());
    t.slope_reduced.reserve(labels.size());
    for (const auto& label : labels) {
        const auto [ep, em] = block_energies(species, label.m_I, field_T);
        const auto bm = block_moment_and_slope(species, label.m_I, field_T);
        const bool plus = label.branch == Branch::plus;
        t.energy_K.push_back(plus ? ep : em);
        t.moment_muB.push_back(plus ? bm.moment_plus_muB : bm.moment_minus_muB);
        t.slope_reduced.push_back(
            (plus ? bm.slope_plus_muB_per_T : bm.slope_minus_muB_per_T) / k_conv);
    }
    return t;
}

// 64-point Gauss-Legendre nodes/weights on [-1, 1]
struct GaussLegendre64 {
    std::array<double, 64> node{}, weight{};
    GaussLegendre64() {
        const int n = 64;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int j = 2; j <= n; ++j) {
                    const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

const GaussLegendre64& gl64() {
    static const GaussLegendre64 g;
    return g;
}

} // namespace

std::string to_string(ResponseKind kind) {
    switch (kind) {
        case ResponseKind::isothermal: return "isothermal";
        case ResponseKind::adiabatic: return "adiabatic";
        case ResponseKind::isolated: return "isolated";
        case ResponseKind::isolated_kubo: return "isolated_kubo";
        case ResponseKind::isolated_finite_amplitude: return "isolated_finite_amplitude";
    }
    return "?";
}

ResponseKind response_kind_from_string(const std::string& name) {
    if (name == "isothermal") return ResponseKind::isothermal;
    if (name == "adiabatic") return ResponseKind::adiabatic;
    if (name == "isolated") return ResponseKind::isolated;
    if (name == "isolated_kubo") return ResponseKind::isolated_kubo;
    if (name == "isolated_finite_amplitude") return ResponseKind::isolated_finite_amplitude;
    throw std::invalid_argument("unknown response kind: " + name);
}

double chi_isothermal(const SpinSpecies& species, double field_T,
                      double temperature_K) {
    if (!(temperature_K > 0.0))
        throw std::invalid_argument("temperature must be > 0");
    const auto t = build_table(species, field_T);
    const auto p = boltzmann_weights(t.energy_K, temperature_K);
    double slope = 0.0, m_mean = 0.0, m2_mean = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        slope += p[i] * t.slope_reduced[i];
        m_mean += p[i] * t.moment_muB[i];
        m2_mean += p[i] * t.moment_muB[i] * t.moment_muB[i];
    }
    return slope + (m2_mean - m_mean * m_mean) / temperature_K;
}

double chi_adiabatic(const SpinSpecies& species, double field_T,
                     double temperature_K) {
    const double chi_t = chi_isothermal(species, field_T, temperature_K);
    const auto pops = Populations::boltzmann(species, field_T, temperature_K);
    const auto tp = thermo(species, pops, field_T, temperature_K);
    const double c_h = *tp.heat_capacity_kB;
    const double dm_dt = *tp.dM_dT_muB_per_K;
    if (c_h == 0.0) {
        if (dm_dt == 0.0)
            throw ZeroHeatCapacityError(
                "C_H = 0 with dM/dT = 0; the limit is chi_S = chi_T");
        throw ZeroHeatCapacityError("C_H = 0: adiabatic susceptibility undefined");
    }
    return chi_t - temperature_K * dm_dt * dm_dt / c_h;
}

double chi_isolated(const SpinSpecies& species, const Populations& populations,
                    double field_T) {
    if (populations.size() != species.level_count())
        throw std::invalid_argument("populations do not match species");
    const auto t = build_table(species, field_T);
    double chi = 0.0;
    for (int i = 0; i < populations.size(); ++i)
        chi += populations[i] * t.slope_reduced[i];
    return chi;
}

double chi_isolated_kubo(const SpinSpecies& species, double temperature_K,
                         double field_T) {
    if (!(temperature_K > 0.0))
        throw std::invalid_argument("temperature must be > 0");
    species.validate();
    const auto labels = state_labels(species);
    const int n = static_cast<int>(labels.size());

    // eigenenergies and the full moment-operator matrix in the eigenbasis;
    // the operator is block diagonal in m_I with one off-diagonal element
    // mu_proj * Delta / E per block
    std::vector<double> energy(n);
    std::vector<std::vector<double>> mu(n, std::vector<double>(n, 0.0));
    const double mu_p = species.effective_moment();
    for (int i = 0; i < n; ++i) {
        const auto [ep, em] = block_energies(species, labels[i].m_I, field_T);
        energy[i] = labels[i].branch == Branch::plus ? ep : em;
        const auto bm = block_moment_and_slope(species, labels[i].m_I, field_T);
        mu[i][i] = labels[i].branch == Branch::plus ? bm.moment_plus_muB
                                                    : bm.moment_minus_muB;
        for (int j = 0; j < n; ++j) {
            if (j == i || labels[j].m_I != labels[i].m_I) continue;
            const double e = std::hypot(
                block_bias(species, labels[i].m_I, field_T), species.gap_delta);
            mu[i][j] = mu_p * species.gap_delta / e;
        }
    }

    const auto w = boltzmann_weights(energy, temperature_K);
    constexpr double degeneracy_tol_K = 1e-10;
    double chi = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double de = energy[j] - energy[i];
            if (std::abs(de) < degeneracy_tol_K) continue;
            chi += (w[i] - w[j]) / de * mu[i][j] * mu[i][j];
        }
    }
    return chi;
}

double chi_isolated_finite_amplitude(const SpinSpecies& species,
                                     const Populations& populations,
                                     double center_field_T,
                                     double probe_amplitude_T) {
    if (!(probe_amplitude_T > 0.0))
        throw std::invalid_argument("probe amplitude must be > 0");
    if (populations.size() != species.level_count())
        throw std::invalid_argument("populations do not match species");
    // M(B0 + b sin(phi)) demodulated over one cycle: a1 = (1/pi) Int M sin dphi
    const auto& gl = gl64();
    double a1 = 0.0;
    for (int q = 0; q < 64; ++q) {
        const double phi = std::numbers::pi * (gl.node[q] + 1.0); // [0, 2pi]
        const double s = std::sin(phi);
        const auto t = build_table(species, center_field_T + probe_amplitude_T * s);
        double mag = 0.0;
        for (int i = 0; i < populations.size(); ++i)
            mag += populations[i] * t.moment_muB[i];
        a1 += gl.weight[q] * mag * s; // d(phi) = pi d(node)
    }
    return a1 / (probe_amplitude_T * k_conv);
}

std::complex<double> plateau_model(double chi_T, double chi_S, double chi_I,
                                   double tau1_s, double tau2_s,
                                   double omega_rad_per_s) {
    if (!(tau1_s > tau2_s) || !(tau2_s > 0.0))
        throw std::invalid_argument("need tau1 > tau2 > 0");
    if (!(chi_T >= chi_S) || !(chi_S >= chi_I))
        throw std::invalid_argument("need chi_T >= chi_S >= chi_I");
    const double w1 = omega_rad_per_s * tau1_s, w2 = omega_rad_per_s * tau2_s;
    const double re = chi_I + (chi_S - chi_I) / (1.0 + w2 * w2) +
                     (chi_T - chi_S) / (1.0 + w1 * w1);
    const double im = (chi_S - chi_I) * w2 / (1.0 + w2 * w2) +
                     (chi_T - chi_S) * w1 / (1.0 + w1 * w1);
    return {re, im};
}

ResponseCurve species_curve(const SpinSpecies& species,
                            std::span<const double> field_grid_T,
                            ResponseKind kind, double temperature_K,
                            const PopulationScheme& scheme,
                            double probe_amplitude_T) {
    ResponseCurve curve;
    curve.field_T.assign(field_grid_T.begin(), field_grid_T.end());
    for (std::size_t i = 1; i < curve.field_T.size(); ++i)
        if (!(curve.field_T[i] > curve.field_T[i - 1]))
            throw std::invalid_argument("field grid must be strictly increasing");
    curve.kind = kind;
    curve.temperature_K = temperature_K;
    curve.populations = scheme.tag();
    curve.probe_amplitude_T =
        kind == ResponseKind::isolated_finite_amplitude ? probe_amplitude_T : 0.0;
    curve.value.reserve(curve.field_T.size());

    const bool boltzmann_only = kind == ResponseKind::isothermal ||
                                kind == ResponseKind::adiabatic ||
                                kind == ResponseKind::isolated_kubo;
    if (boltzmann_only && scheme.mode != PopulationScheme::Mode::boltzmann)
        throw std::invalid_argument(to_string(kind) +
                                    " requires Boltzmann populations");

    for (double b : curve.field_T) {
        switch (kind) {
            case ResponseKind::isothermal:
                curve.value.push_back(chi_isothermal(species, b, temperature_K));
                break;
            case ResponseKind::adiabatic:
                curve.value.push_back(chi_adiabatic(species, b, temperature_K));
                break;
            case ResponseKind::isolated:
                curve.value.push_back(chi_isolated(
                    species, scheme.realize(species, b, temperature_K), b));
                break;
            case ResponseKind::isolated_kubo:
                curve.value.push_back(chi_isolated_kubo(species, temperature_K, b));
                break;
            case ResponseKind::isolated_finite_amplitude:
                curve.value.push_back(chi_isolated_finite_amplitude(
                    species, scheme.realize(species, b, temperature_K), b,
                    probe_amplitude_T));
                break;
        }
    }
    return curve;
}

} // namespace spinchi
