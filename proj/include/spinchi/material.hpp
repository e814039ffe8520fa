#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spinchi/response.hpp"

// A full sample model: apical + basal species sharing one hyperfine constant
// and moment, a discrete strain-gap mixture, and the ion concentration.
namespace spinchi {

struct DeltaComponent {
    double gap_K = 0.0;  // Delta/k_B
    double weight = 0.0; // f_k
};

// Discrete gap mixture {(Delta_k, f_k)} with an implicit zero-gap weight
// f0 = 1 - sum f_k.  Zero-gap ions carry no response and enter only through
// the normalization.
class DeltaDistribution {
  public:
    DeltaDistribution() = default;
    explicit DeltaDistribution(std::vector<DeltaComponent> components);
    static DeltaDistribution single(double gap_K);

    const std::vector<DeltaComponent>& components() const { return components_; }
    double zero_gap_weight() const;
    double responding_weight() const; // sum of f_k
    // 1/Delta_eff = sum f_k / Delta_k over the responding components
    double effective_gap_K() const;

  private:
    std::vector<DeltaComponent> components_;
};

struct Material {
    std::vector<SpinSpecies> groups; // gap_delta of each group is a placeholder;
                                     // spectra sweep it over the distribution
    DeltaDistribution distribution;
    double concentration_x = 0.0;
    std::optional<double> number_density_per_m3;
};

// The dilute spin-ice model: one apical group (projection 1, multiplicity 1)
// and one basal group (projection 1/3, multiplicity 3), both with I = 7/2 and
// mu = g_parallel / 2 in mu_B.
Material spin_ice_material(double x, double g_parallel, double A_K,
                           DeltaDistribution distribution);

// multiplicity-weighted per-ion spectrum of the whole sample:
// value(B) = sum_groups (mult/sum mult) sum_k f_k chi(species with Delta_k; B)
ResponseCurve total_spectrum(const Material& material,
                             std::span<const double> field_grid_T,
                             double temperature_K, ResponseKind kind,
                             const PopulationScheme& scheme,
                             double probe_amplitude_T = 0.0);

// per-ion reduced values -> dimensionless SI volume susceptibility
ResponseCurve to_si(const ResponseCurve& curve, double number_density_per_m3);
ResponseCurve to_per_ion(const ResponseCurve& curve, double number_density_per_m3);

// Curie constant per formula unit (reduced units) for <111> Ising ions with
// the field along [111]: the directional average of cos^2(theta) over one
// apical and three basal sites is 1/3, so C = x mu^2 / 3 with mu = g/2.
double curie_constant_per_fu(double x, double g_parallel);
double g_parallel_from_curie(double curie_constant, double x);

} // namespace spinchi
