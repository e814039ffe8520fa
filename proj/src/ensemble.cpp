#include "spinchi/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spinchi {

namespace {

std::vector<double> level_energies(const SpinSpecies& species, double field_T) {
    std::vector<double> e;
    e.reserve(species.level_count());
    for (const auto& label : state_labels(species)) {
        const auto [ep, em] = block_energies(species, label.m_I, field_T);
        e.push_back(label.branch == Branch::plus ? ep : em);
    }
    return e;
}

} // namespace

std::vector<double> boltzmann_weights(std::span<const double> energies_K,
                                      double temperature_K) {
    if (!(temperature_K > 0.0))
        throw std::invalid_argument("temperature must be > 0");
    const double e_min = *std::min_element(energies_K.begin(), energies_K.end());
    std::vector<double> w(energies_K.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < energies_K.size(); ++i) {
        w[i] = std::exp(-(energies_K[i] - e_min) / temperature_K);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

Populations Populations::boltzmann(const SpinSpecies& species, double field_T,
                                   double temperature_K) {
    species.validate();
    Populations p;
    p.values_ = boltzmann_weights(level_energies(species, field_T), temperature_K);
    p.provenance_ = Provenance::boltzmann;
    p.field_T_ = field_T;
    p.temperature_K_ = temperature_K;
    return p;
}

Populations Populations::frozen(const SpinSpecies& species, double prep_field_T,
                                double prep_temperature_K) {
    Populations p = boltzmann(species, prep_field_T, prep_temperature_K);
    p.provenance_ = Provenance::frozen;
    return p;
}

Populations Populations::custom(const SpinSpecies& species,
                                std::vector<double> probabilities) {
    species.validate();
    if (static_cast<int>(probabilities.size()) != species.level_count())
        throw std::invalid_argument("expected one probability per level");
    double sum = 0.0;
    for (double x : probabilities) {
        if (!(x >= 0.0)) throw std::invalid_argument("probabilities must be >= 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to 1 within 1e-12");
    Populations p;
    p.values_ = std::move(probabilities);
    p.provenance_ = Provenance::custom;
    return p;
}

double Populations::probability(const SpinSpecies& species,
                                const StateLabel& label) const {
    return values_[label_index(species, label)];
}

Populations boltzmann_populations(const SpinSpecies& species, double field_T,
                                  double temperature_K) {
    return Populations::boltzmann(species, field_T, temperature_K);
}

Populations frozen_populations(const SpinSpecies& species, double prep_field_T,
                               double prep_temperature_K) {
    return Populations::frozen(species, prep_field_T, prep_temperature_K);
}

PopulationScheme PopulationScheme::boltzmann() { return {}; }

PopulationScheme PopulationScheme::frozen(double prep_field_T,
                                          double prep_temperature_K) {
    PopulationScheme s;
    s.mode = Mode::frozen;
    s.prep_field_T = prep_field_T;
    s.prep_temperature_K = prep_temperature_K;
    return s;
}

PopulationScheme PopulationScheme::custom(std::vector<double> probabilities) {
    PopulationScheme s;
    s.mode = Mode::custom;
    s.custom_probabilities = std::move(probabilities);
    return s;
}

Populations PopulationScheme::realize(const SpinSpecies& species, double field_T,
                                      double temperature_K) const {
    switch (mode) {
        case Mode::boltzmann:
            return Populations::boltzmann(species, field_T, temperature_K);
        case Mode::frozen:
            return Populations::frozen(species, prep_field_T, prep_temperature_K);
        case Mode::custom:
            return Populations::custom(species, custom_probabilities);
    }
    throw std::logic_error("unreachable");
}

std::string PopulationScheme::tag() const {
    switch (mode) {
        case Mode::boltzmann: return "boltzmann";
        case Mode::frozen:
            return "frozen(B=" + std::to_string(prep_field_T) +
                   "T,T=" + std::to_string(prep_temperature_K) + "K)";
        case Mode::custom: return "custom";
    }
    return "?";
}

ThermoPoint thermo(const SpinSpecies& species, const Populations& populations,
                   double field_T, double temperature_K) {
    species.validate();
    if (!(temperature_K > 0.0))
        throw std::invalid_argument("temperature must be > 0");
    if (populations.size() != species.level_count())
        throw std::invalid_argument("populations do not match species");

    const auto labels = state_labels(species);
    ThermoPoint out;

    std::vector<double> energy(labels.size()), moment(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto [ep, em] = block_energies(species, labels[i].m_I, field_T);
        energy[i] = labels[i].branch == Branch::plus ? ep : em;
        const auto bm = block_moment_and_slope(species, labels[i].m_I, field_T);
        moment[i] = labels[i].branch == Branch::plus ? bm.moment_plus_muB
                                                     : bm.moment_minus_muB;
        out.magnetization_muB += populations[static_cast<int>(i)] * moment[i];
    }

    const double e_min = *std::min_element(energy.begin(), energy.end());
    double q_shifted = 0.0;
    for (double e : energy) q_shifted += std::exp(-(e - e_min) / temperature_K);
    out.partition_function = q_shifted * std::exp(-e_min / temperature_K);

    if (populations.provenance() == Populations::Provenance::boltzmann) {
        if (std::abs(populations.reference_field_T() - field_T) > 1e-12 ||
            std::abs(populations.reference_temperature_K() - temperature_K) >
                1e-12 * temperature_K)
            throw std::invalid_argument(
                "Boltzmann populations were built at a different (B, T)");
        double e_mean = 0.0, e2_mean = 0.0, m_mean = 0.0, em_mean = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const double p = populations[static_cast<int>(i)];
            e_mean += p * energy[i];
            e2_mean += p * energy[i] * energy[i];
            m_mean += p * moment[i];
            em_mean += p * energy[i] * moment[i];
        }
        const double t2 = temperature_K * temperature_K;
        out.heat_capacity_kB = (e2_mean - e_mean * e_mean) / t2;
        out.dM_dT_muB_per_K = (em_mean - e_mean * m_mean) / t2;
    }
    return out;
}

} // namespace spinchi
