#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Exact closed forms for an Ising-like effective spin-1/2 coupled to a nuclear
// spin I.  The Hamiltonian is block diagonal in the nuclear projection m_I and
// each 2x2 block carries a bias h = A*m_I + mu_proj*B and a transverse gap
// Delta, with eigenvalues +-sqrt(h^2 + Delta^2).  The 2x2 closed form is exact
// for this model and is the only diagonalizer in the toolkit.
namespace spinchi {

struct SpinSpecies {
    double moment_mu = 0.0;   // moment of the pure up/down states, mu_B
    double hyperfine_A = 0.0; // hyperfine constant A/k_B, kelvin
    double gap_delta = 0.0;   // transverse gap Delta/k_B, kelvin
    double projection = 1.0;  // field-projection factor, (0, 1]
    double nuclear_I = 0.0;   // non-negative half-integer; 0 = two-state model
    int multiplicity = 1;     // relative site count

    // moment along the field axis, mu_B
    double effective_moment() const { return projection * moment_mu; }
    // number of levels, 2(2I+1)
    int level_count() const;
    // throws std::invalid_argument when a field is out of range
    void validate() const;
};

SpinSpecies two_state_species(double moment_mu, double gap_delta);
SpinSpecies hyperfine_species(double moment_mu, double hyperfine_A,
                              double gap_delta, double projection,
                              double nuclear_I, int multiplicity = 1);

enum class Branch { minus, plus };

inline int branch_sign(Branch b) { return b == Branch::plus ? 1 : -1; }

// (m_I, +-) index of one of the 2(2I+1) levels
struct StateLabel {
    double m_I = 0.0;
    Branch branch = Branch::minus;
};

// Signalled where both the gap and the bias vanish (Delta = 0 and h = 0):
// moments, slopes and concurrence are undefined at an exact degeneracy.
struct DegeneratePointError : std::domain_error {
    using std::domain_error::domain_error;
};

// h = A*m_I + projection*mu*B, kelvin
double block_bias(const SpinSpecies& species, double m_I, double field_T);

// (E_plus, E_minus) = (+E, -E) with E = sqrt(h^2 + Delta^2), kelvin
std::pair<double, double> block_energies(const SpinSpecies& species,
                                         double m_I, double field_T);

struct BlockMoments {
    double moment_plus_muB;
    double moment_minus_muB;
    double slope_plus_muB_per_T;
    double slope_minus_muB_per_T;
};

// m_+- = -dE_+-/dB and the field derivative dm_+-/dB, both analytic
BlockMoments block_moment_and_slope(const SpinSpecies& species, double m_I,
                                    double field_T);

// C = Delta/sqrt(Delta^2 + h^2); shared by both branches of a block
double concurrence(const SpinSpecies& species, double m_I, double field_T);

struct LevelPoint {
    StateLabel label;
    double energy_K;
    double moment_muB;
    double moment_slope_muB_per_T;
    double concurrence;
};

LevelPoint level_point(const SpinSpecies& species, const StateLabel& label,
                       double field_T);

// all labels in canonical order: m_I ascending, minus branch before plus
std::vector<StateLabel> state_labels(const SpinSpecies& species);
int label_index(const SpinSpecies& species, const StateLabel& label);

enum class CrossingKind { avoided, direct };

// A crossing of two levels.  Avoided crossings join the branches of one block
// (m_other == m_I); direct crossings join levels of two different blocks and
// are located in the Delta << A linearized approximation.
struct LevelCrossing {
    double m_I;
    double m_other;
    double field_T;
    CrossingKind kind;
};

// 2I+1 avoided crossings (one per m_I, at h = 0) plus all pairwise direct
// crossings, sorted by field
std::vector<LevelCrossing> level_crossings(const SpinSpecies& species);

} // namespace spinchi
