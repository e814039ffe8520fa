#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "spinchi/ensemble.hpp"
#include "spinchi/spin_model.hpp"

// The three quasi-static susceptibilities of one species, per ion, in reduced
// units of mu_B^2/k_B per kelvin.  chi_T >= chi_S >= chi_I >= 0 holds for
// Boltzmann populations.
namespace spinchi {

enum class ResponseKind {
    isothermal,
    adiabatic,
    isolated,
    isolated_kubo,
    isolated_finite_amplitude,
};

enum class CurveUnits { per_ion, si_volume };

std::string to_string(ResponseKind kind);
ResponseKind response_kind_from_string(const std::string& name);

struct ResponseCurve {
    std::vector<double> field_T;  // strictly increasing
    std::vector<double> value;
    ResponseKind kind = ResponseKind::isolated;
    CurveUnits units = CurveUnits::per_ion;
    std::string species_id;
    double temperature_K = 0.0;
    std::string populations = "boltzmann";
    double probe_amplitude_T = 0.0; // 0 = quasi-static
};

// Signalled by chi_adiabatic when C_H vanishes identically; when dM/dT is
// also identically zero the caller may substitute chi_S = chi_T.
struct ZeroHeatCapacityError : std::domain_error {
    using std::domain_error::domain_error;
};

// equilibrium dM/dB: population slopes plus state-moment slopes
double chi_isothermal(const SpinSpecies& species, double field_T,
                      double temperature_K);

// chi_T - T (dM/dT)^2 / C_H
double chi_adiabatic(const SpinSpecies& species, double field_T,
                     double temperature_K);

// sum_i p_i dm_i/dB with the populations held fixed; valid for any
// population assignment
double chi_isolated(const SpinSpecies& species, const Populations& populations,
                    double field_T);

// equivalent eigenstate-pair form of the isolated susceptibility (Boltzmann
// weights); pairs closer than 1e-10 K are excluded, which loses nothing since
// the moment operator has no matrix elements between blocks
double chi_isolated_kubo(const SpinSpecies& species, double temperature_K,
                         double field_T);

// apparent response of a sinusoidal probe of amplitude b around B0 with fixed
// populations: in-phase fundamental Fourier coefficient of M(t) divided by b
double chi_isolated_finite_amplitude(const SpinSpecies& species,
                                     const Populations& populations,
                                     double center_field_T,
                                     double probe_amplitude_T);

// Double-Debye interpolation between the three quasi-static plateaus:
// chi(w) = chi_I + (chi_S - chi_I)/(1 + i w tau2) + (chi_T - chi_S)/(1 + i w tau1).
// Returned as chi' + i chi'' with the loss chi'' >= 0.
std::complex<double> plateau_model(double chi_T, double chi_S, double chi_I,
                                   double tau1_s, double tau2_s,
                                   double omega_rad_per_s);

// per-species curve over a field grid
ResponseCurve species_curve(const SpinSpecies& species,
                            std::span<const double> field_grid_T,
                            ResponseKind kind, double temperature_K,
                            const PopulationScheme& scheme,
                            double probe_amplitude_T = 0.0);

} // namespace spinchi
