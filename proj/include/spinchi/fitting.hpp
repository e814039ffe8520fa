#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinchi/material.hpp"
#include "spinchi/response.hpp"

// Data-reduction pipeline: peak detection, hyperfine refinement, gap-weight
// fitting, Curie fitting and population inference.  All solvers are
// deterministic: fixed enumeration order, no randomized initialization.
namespace spinchi {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Peak {
    double field_T = 0.0;
    double height = 0.0;       // curve units
    double width_T = 0.0;      // half-prominence width estimate
    double prominence = 0.0;
};

struct PeakSet {
    std::vector<Peak> peaks; // sorted by field
};

struct FitResult {
    std::map<std::string, double> parameters;
    std::map<std::string, double> standard_errors;
    double residual_norm = 0.0; // ||data - model||_2, curve units
    std::optional<double> scale;
    std::string model_description;
};

// Local-maximum scan with three-point quadratic interpolation of position and
// height.  min_prominence is a fraction of the full curve range; peaks below
// it are discarded.  Throws FitError when nothing survives.
PeakSet detect_peaks(const ResponseCurve& curve, double min_prominence);

// Least squares of B_n = A m_n / (mu projection mu_B/k_B) with the peaks at
// positive field assigned m_n = 1/2, 3/2, ... in field order.
FitResult fit_hyperfine_A(const PeakSet& peaks, double moment_mu,
                          double projection, double nuclear_I = 3.5);

// Constrained linear least squares for the gap-distribution weights: the model
// is linear in (f_1 ... f_k), with f >= 0 and sum f <= 1.  With fit_scale the
// absolute normalization is free, so only the relative weights are
// identifiable and they are reported normalized to sum 1.
FitResult fit_weights(const ResponseCurve& data, const Material& material,
                      double temperature_K, double probe_amplitude_T = 0.0,
                      bool fit_scale = false);

// same, with caller-supplied basis curves (resampled onto the data grid by
// monotone cubic interpolation when the grids differ)
FitResult fit_weights_with_basis(const ResponseCurve& data,
                                 const std::vector<ResponseCurve>& basis,
                                 bool fit_scale = false);

// chi = C/T + chi0 by linear least squares in 1/T; g_parallel derived from C
// through the material Curie expression.
FitResult fit_curie(std::span<const std::pair<double, double>> data_T_chi,
                    double concentration_x);

struct ChannelPopulation {
    double abs_m_I = 0.0;          // |m_I| of the crossing channel
    double crossing_field_T = 0.0; // analytic crossing field
    double peak_height = 0.0;      // measured height (basal share removed)
    double population_difference = 0.0; // p_minus - p_major for the channel
};

struct PopulationInference {
    std::vector<ChannelPopulation> channels;
    // equilibrium effective temperature fitted to the log height ratios;
    // +inf marks the uniform-population limit
    double effective_temperature_K = 0.0;
    double effective_temperature_se_K = 0.0;
    double log_residual_norm = 0.0;
    bool equilibrium_violating = false;
    std::string description;
};

// Inverts peak heights into per-channel population differences
// (height = w_apical mu^2 / Delta_eff x (p_- - p_+)) and fits one effective
// temperature to their ratios with equilibrium Boltzmann populations at each
// crossing field.  Heights that grow with field are flagged as
// equilibrium-violating.
PopulationInference infer_populations(const PeakSet& peaks,
                                      const Material& material);

// Fritsch-Carlson monotone cubic interpolation; xs strictly increasing,
// queries clamped to the data range.
std::vector<double> interpolate_monotone_cubic(std::span<const double> xs,
                                               std::span<const double> ys,
                                               std::span<const double> xq);

} // namespace spinchi
