#include "spinchi/material.hpp"

#include <cmath>
#include <stdexcept>

#include "spinchi/constants.hpp"

namespace spinchi {

DeltaDistribution::DeltaDistribution(std::vector<DeltaComponent> components)
    : components_(std::move(components)) {
    double sum = 0.0, last = 0.0;
    for (const auto& c : components_) {
        if (!(c.gap_K > 0.0))
            throw std::invalid_argument("distribution gaps must be > 0");
        if (!(c.gap_K > last))
            throw std::invalid_argument("distribution gaps must be strictly increasing");
        if (!(c.weight >= 0.0))
            throw std::invalid_argument("distribution weights must be >= 0");
        last = c.gap_K;
        sum += c.weight;
    }
    if (sum > 1.0 + 1e-12)
        throw std::invalid_argument("distribution weights must sum to <= 1");
}

DeltaDistribution DeltaDistribution::single(double gap_K) {
    return DeltaDistribution({{gap_K, 1.0}});
}

double DeltaDistribution::zero_gap_weight() const {
    return 1.0 - responding_weight();
}

double DeltaDistribution::responding_weight() const {
    double sum = 0.0;
    for (const auto& c : components_) sum += c.weight;
    return sum;
}

double DeltaDistribution::effective_gap_K() const {
    double inv = 0.0;
    for (const auto& c : components_) inv += c.weight / c.gap_K;
    if (inv == 0.0) throw std::invalid_argument("distribution has no responding weight");
    return 1.0 / inv;
}

Material spin_ice_material(double x, double g_parallel, double A_K,
                           DeltaDistribution distribution) {
    if (!(x > 0.0) || x > 2.0)
        throw std::invalid_argument("concentration x must be in (0, 2]");
    if (!(g_parallel > 0.0)) throw std::invalid_argument("g_parallel must be > 0");
    if (!(A_K > 0.0)) throw std::invalid_argument("hyperfine constant must be > 0");
    const double mu = 0.5 * g_parallel;
    Material m;
    m.groups.push_back(hyperfine_species(mu, A_K, 0.0, 1.0, 3.5, 1));       // apical
    m.groups.push_back(hyperfine_species(mu, A_K, 0.0, 1.0 / 3.0, 3.5, 3)); // basal
    m.distribution = std::move(distribution);
    m.concentration_x = x;
    return m;
}

ResponseCurve total_spectrum(const Material& material,
                             std::span<const double> field_grid_T,
                             double temperature_K, ResponseKind kind,
                             const PopulationScheme& scheme,
                             double probe_amplitude_T) {
    if (material.groups.empty())
        throw std::invalid_argument("material has no species groups");
    int total_mult = 0;
    for (const auto& g : material.groups) total_mult += g.multiplicity;

    ResponseCurve sum;
    bool first = true;
    for (const auto& group : material.groups) {
        for (const auto& comp : material.distribution.components()) {
            SpinSpecies s = group;
            s.gap_delta = comp.gap_K;
            const double weight =
                static_cast<double>(group.multiplicity) / total_mult * comp.weight;
            ResponseCurve part = species_curve(s, field_grid_T, kind, temperature_K,
                                               scheme, probe_amplitude_T);
            if (first) {
                sum = part;
                for (double& v : sum.value) v *= weight;
                first = false;
            } else {
                for (std::size_t i = 0; i < sum.value.size(); ++i)
                    sum.value[i] += weight * part.value[i];
            }
        }
    }
    if (first) throw std::invalid_argument("distribution has no components");
    sum.species_id = "material";
    return sum;
}

ResponseCurve to_si(const ResponseCurve& curve, double number_density_per_m3) {
    if (!(number_density_per_m3 > 0.0))
        throw std::invalid_argument("number density must be > 0");
    if (curve.units == CurveUnits::si_volume)
        throw std::invalid_argument("curve is already in SI volume units");
    ResponseCurve out = curve;
    const double f = constants::si_volume_factor_m3_K * number_density_per_m3;
    for (double& v : out.value) v *= f;
    out.units = CurveUnits::si_volume;
    return out;
}

ResponseCurve to_per_ion(const ResponseCurve& curve, double number_density_per_m3) {
    if (!(number_density_per_m3 > 0.0))
        throw std::invalid_argument("number density must be > 0");
    if (curve.units == CurveUnits::per_ion)
        throw std::invalid_argument("curve is already in per-ion units");
    ResponseCurve out = curve;
    const double f = constants::si_volume_factor_m3_K * number_density_per_m3;
    for (double& v : out.value) v /= f;
    out.units = CurveUnits::per_ion;
    return out;
}

double curie_constant_per_fu(double x, double g_parallel) {
    const double mu = 0.5 * g_parallel;
    return x * mu * mu / 3.0;
}

double g_parallel_from_curie(double curie_constant, double x) {
    if (!(curie_constant > 0.0) || !(x > 0.0))
        throw std::invalid_argument("Curie constant and x must be > 0");
    return 2.0 * std::sqrt(3.0 * curie_constant / x);
}

} // namespace spinchi
