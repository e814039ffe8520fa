#include "spinchi/spin_model.hpp"

#include <algorithm>
#include <cmath>

#include "spinchi/constants.hpp"

namespace spinchi {

namespace {

bool is_half_integer(double x) { return std::abs(2.0 * x - std::round(2.0 * x)) < 1e-9; }

void check_m(const SpinSpecies& species, double m_I) {
    if (!is_half_integer(m_I) || std::abs(m_I) > species.nuclear_I + 1e-9)
        throw std::invalid_argument("m_I = " + std::to_string(m_I) +
                                    " is not a valid nuclear projection for I = " +
                                    std::to_string(species.nuclear_I));
}

} // namespace

int SpinSpecies::level_count() const {
    return 2 * (static_cast<int>(std::round(2.0 * nuclear_I)) + 1);
}

void SpinSpecies::validate() const {
    if (!(moment_mu > 0.0)) throw std::invalid_argument("moment_mu must be > 0");
    if (!(gap_delta >= 0.0)) throw std::invalid_argument("gap_delta must be >= 0");
    if (!(hyperfine_A >= 0.0)) throw std::invalid_argument("hyperfine_A must be >= 0");
    if (!(projection > 0.0) || projection > 1.0)
        throw std::invalid_argument("projection must be in (0, 1]");
    if (nuclear_I < 0.0 || !is_half_integer(nuclear_I))
        throw std::invalid_argument("nuclear_I must be a non-negative half-integer");
    if (multiplicity < 1) throw std::invalid_argument("multiplicity must be >= 1");
}

SpinSpecies two_state_species(double moment_mu, double gap_delta) {
    SpinSpecies s;
    s.moment_mu = moment_mu;
    s.gap_delta = gap_delta;
    s.validate();
    return s;
}

SpinSpecies hyperfine_species(double moment_mu, double hyperfine_A, double gap_delta,
                              double projection, double nuclear_I, int multiplicity) {
    SpinSpecies s;
    s.moment_mu = moment_mu;
    s.hyperfine_A = hyperfine_A;
    s.gap_delta = gap_delta;
    s.projection = projection;
    s.nuclear_I = nuclear_I;
    s.multiplicity = multiplicity;
    s.validate();
    return s;
}

double block_bias(const SpinSpecies& species, double m_I, double field_T) {
    check_m(species, m_I);
    return species.hyperfine_A * m_I +
           species.effective_moment() * constants::mu_B_per_k_B_K_per_T * field_T;
}

std::pair<double, double> block_energies(const SpinSpecies& species, double m_I,
                                         double field_T) {
    const double h = block_bias(species, m_I, field_T);
    const double e = std::hypot(h, species.gap_delta);
    return {e, -e};
}

BlockMoments block_moment_and_slope(const SpinSpecies& species, double m_I,
                                    double field_T) {
    const double h = block_bias(species, m_I, field_T);
    const double d = species.gap_delta;
    const double e = std::hypot(h, d);
    if (e == 0.0)
        throw DegeneratePointError("moment undefined at the degenerate point "
                                   "Delta = 0, h = 0");
    const double mu_p = species.effective_moment();
    const double m_up = -mu_p * h / e; // plus branch
    const double slope_up = -mu_p * mu_p * constants::mu_B_per_k_B_K_per_T * d * d / (e * e * e);
    return {m_up, -m_up, slope_up, -slope_up};
}

double concurrence(const SpinSpecies& species, double m_I, double field_T) {
    const double h = block_bias(species, m_I, field_T);
    const double e = std::hypot(h, species.gap_delta);
    if (e == 0.0)
        throw DegeneratePointError("concurrence undefined at the degenerate point "
                                   "Delta = 0, h = 0");
    return species.gap_delta / e;
}

LevelPoint level_point(const SpinSpecies& species, const StateLabel& label,
                       double field_T) {
    const auto [ep, em] = block_energies(species, label.m_I, field_T);
    const auto bm = block_moment_and_slope(species, label.m_I, field_T);
    LevelPoint p;
    p.label = label;
    if (label.branch == Branch::plus) {
        p.energy_K = ep;
        p.moment_muB = bm.moment_plus_muB;
        p.moment_slope_muB_per_T = bm.slope_plus_muB_per_T;
    } else {
        p.energy_K = em;
        p.moment_muB = bm.moment_minus_muB;
        p.moment_slope_muB_per_T = bm.slope_minus_muB_per_T;
    }
    p.concurrence = concurrence(species, label.m_I, field_T);
    return p;
}

std::vector<StateLabel> state_labels(const SpinSpecies& species) {
    const int two_I = static_cast<int>(std::round(2.0 * species.nuclear_I));
    std::vector<StateLabel> labels;
    labels.reserve(species.level_count());
    for (int two_m = -two_I; two_m <= two_I; two_m += 2) {
        labels.push_back({0.5 * two_m, Branch::minus});
        labels.push_back({0.5 * two_m, Branch::plus});
    }
    return labels;
}

int label_index(const SpinSpecies& species, const StateLabel& label) {
    check_m(species, label.m_I);
    const int two_I = static_cast<int>(std::round(2.0 * species.nuclear_I));
    const int two_m = static_cast<int>(std::round(2.0 * label.m_I));
    return (two_m + two_I) + (label.branch == Branch::plus ? 1 : 0);
}

std::vector<LevelCrossing> level_crossings(const SpinSpecies& species) {
    species.validate();
    const double mu_K_per_T = species.effective_moment() * constants::mu_B_per_k_B_K_per_T;
    const int two_I = static_cast<int>(std::round(2.0 * species.nuclear_I));
    std::vector<LevelCrossing> out;
    for (int two_m = -two_I; two_m <= two_I; two_m += 2) {
        const double m = 0.5 * two_m;
        out.push_back({m, m, -species.hyperfine_A * m / mu_K_per_T, CrossingKind::avoided});
    }
    // direct crossings of the linearized levels: opposite electronic branches
    // of two different blocks meet where A(m + m') + 2*mu_proj*B = 0
    for (int two_m = -two_I; two_m <= two_I; two_m += 2) {
        for (int two_m2 = two_m + 2; two_m2 <= two_I; two_m2 += 2) {
            const double m = 0.5 * two_m, m2 = 0.5 * two_m2;
            out.push_back({m, m2, -species.hyperfine_A * (m + m2) / (2.0 * mu_K_per_T),
                           CrossingKind::direct});
        }
    }
    std::sort(out.begin(), out.end(), [](const LevelCrossing& a, const LevelCrossing& b) {
        if (a.field_T != b.field_T) return a.field_T < b.field_T;
        if (a.m_I != b.m_I) return a.m_I < b.m_I;
        return a.m_other < b.m_other;
    });
    return out;
}

} // namespace spinchi
