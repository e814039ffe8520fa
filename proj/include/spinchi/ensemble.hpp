#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinchi/spin_model.hpp"

// Population assignments over the 2(2I+1) levels and canonical-ensemble
// thermodynamics.  State identity is the (m_I, branch) label: the analytic
// branches of a block never cross within the block, and no operator couples
// blocks, so frozen populations follow the smooth branches to any field.
namespace spinchi {

class Populations {
  public:
    enum class Provenance { boltzmann, frozen, custom };

    static Populations boltzmann(const SpinSpecies& species, double field_T,
                                 double temperature_K);
    // equilibrium populations of (prep_field, prep_temperature), carried
    // unchanged to any other field
    static Populations frozen(const SpinSpecies& species, double prep_field_T,
                              double prep_temperature_K);
    static Populations custom(const SpinSpecies& species,
                              std::vector<double> probabilities);

    double operator[](int index) const { return values_[index]; }
    double probability(const SpinSpecies& species, const StateLabel& label) const;
    int size() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }

    Provenance provenance() const { return provenance_; }
    // field and temperature the populations were constructed at
    double reference_field_T() const { return field_T_; }
    double reference_temperature_K() const { return temperature_K_; }

  private:
    Populations() = default;
    std::vector<double> values_;
    Provenance provenance_ = Provenance::custom;
    double field_T_ = 0.0;
    double temperature_K_ = 0.0;
};

Populations boltzmann_populations(const SpinSpecies& species, double field_T,
                                  double temperature_K);
Populations frozen_populations(const SpinSpecies& species, double prep_field_T,
                               double prep_temperature_K);

// normalized exp(-E/T) weights, stabilized by an energy shift
std::vector<double> boltzmann_weights(std::span<const double> energies_K,
                                      double temperature_K);

// Recipe for building populations across a field grid; the custom vector is
// indexed in canonical label order and reused at every field.
struct PopulationScheme {
    enum class Mode { boltzmann, frozen, custom };
    Mode mode = Mode::boltzmann;
    double prep_field_T = 0.0;
    double prep_temperature_K = 0.0;
    std::vector<double> custom_probabilities;

    static PopulationScheme boltzmann();
    static PopulationScheme frozen(double prep_field_T, double prep_temperature_K);
    static PopulationScheme custom(std::vector<double> probabilities);

    Populations realize(const SpinSpecies& species, double field_T,
                        double temperature_K) const;
    std::string tag() const;
};

struct ThermoPoint {
    double magnetization_muB = 0.0;
    double partition_function = 0.0;
    // fluctuation quantities; set only for Boltzmann populations, where
    // chi_S of the thermodynamic identity is meaningful
    std::optional<double> heat_capacity_kB;
    std::optional<double> dM_dT_muB_per_K;
};

// M = sum_i p_i m_i plus, for Boltzmann provenance, C_H = var(E)/T^2 and
// dM/dT = cov(E, m)/T^2
ThermoPoint thermo(const SpinSpecies& species, const Populations& populations,
                   double field_T, double temperature_K);

} // namespace spinchi
