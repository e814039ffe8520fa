#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spinchi/constants.hpp"
#include "spinchi/response.hpp"

using namespace spinchi;

namespace {

constexpr double k_conv = constants::mu_B_per_k_B_K_per_T;

const SpinSpecies apical = hyperfine_species(9.5, 0.2945, 0.015, 1.0, 3.5, 1);

// closed form for the two-state isolated susceptibility:
// chi_I = (mu^2 C^3 / Delta) tanh(Delta / (C T)) with C = Delta/E
double two_state_chi_I_oracle(double mu, double delta, double b, double t) {
    const double h = mu * k_conv * b;
    const double c = delta / std::hypot(h, delta);
    return mu * mu * c * c * c / delta * std::tanh(delta / (c * t));
}

// high-temperature Lorentzian limit
double lorentzian_oracle(double mu, double delta, double b, double t) {
    const double h = mu * k_conv * b;
    return mu * mu / t / (1.0 + h * h / (delta * delta));
}

// brute-force isothermal susceptibility: finite difference over field of the
// magnetization assembled from raw level sums, independent of the analytic
// fluctuation form
double chi_T_brute(const SpinSpecies& s, double b, double t) {
    auto mag = [&](double bb) {
        const auto labels = state_labels(s);
        std::vector<double> e, m;
        for (const auto& label : labels) {
            const double sign = label.branch == Branch::plus ? 1.0 : -1.0;
            const double h0 = s.hyperfine_A * label.m_I +
                              s.effective_moment() * k_conv * bb;
            const double en = std::hypot(h0, s.gap_delta);
            e.push_back(sign * en);
            m.push_back(-sign * s.effective_moment() * h0 / en);
        }
        double emin = e[0];
        for (double x : e) emin = std::min(emin, x);
        double q = 0.0, num = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            const double w = std::exp(-(e[i] - emin) / t);
            q += w;
            num += w * m[i];
        }
        return num / q;
    };
    const double db = 1e-7;
    return (mag(b + db) - mag(b - db)) / (2.0 * db) / k_conv;
}

} // namespace

TEST_CASE("isothermal susceptibility") {
    SUBCASE("two-state zero field equals (mu^2/Delta) tanh(Delta/T)") {
        const SpinSpecies s = two_state_species(10.0, 0.05);
        for (double t : {0.02, 0.3, 5.0})
            CHECK(chi_isothermal(s, 0.0, t) ==
                  doctest::Approx(100.0 / 0.05 * std::tanh(0.05 / t)).epsilon(1e-12));
    }
    SUBCASE("Curie limit as the gap closes") {
        const SpinSpecies s = two_state_species(10.0, 1e-6);
        CHECK(chi_isothermal(s, 0.0, 1.0) == doctest::Approx(100.0).epsilon(1e-5));
    }
    SUBCASE("high-temperature apical value approaches Curie, brute-force checked") {
        const double t = 100.0, b = 0.5;
        const double chi = chi_isothermal(apical, b, t);
        CHECK(chi == doctest::Approx(9.5 * 9.5 / t).epsilon(1e-3));
        CHECK(chi == doctest::Approx(chi_T_brute(apical, b, t)).epsilon(1e-6));
    }
    SUBCASE("matches the finite difference of M at generic points") {
        for (double b : {0.0, 0.0231, 0.08})
            for (double t : {0.5, 2.1, 10.0})
                CHECK(chi_isothermal(apical, b, t) ==
                      doctest::Approx(chi_T_brute(apical, b, t)).epsilon(1e-6));
    }
}

TEST_CASE("adiabatic susceptibility") {
    SUBCASE("equals chi_T at zero field where dM/dT vanishes") {
        for (double t : {0.5, 2.1, 10.0})
            CHECK(chi_adiabatic(apical, 0.0, t) ==
                  doctest::Approx(chi_isothermal(apical, 0.0, t)).epsilon(1e-10));
    }
    SUBCASE("two-state adiabat collapses onto the isolated response") {
        // with only two levels, constant entropy pins the populations, so
        // chi_S = chi_I identically while chi_T stays strictly above
        const SpinSpecies s = two_state_species(10.0, 0.05);
        const double b = 0.01, t = 0.3;
        const double chi_t = chi_isothermal(s, b, t);
        const double chi_s = chi_adiabatic(s, b, t);
        const double chi_i = chi_isolated(s, Populations::boltzmann(s, b, t), b);
        CHECK(chi_s < chi_t);
        CHECK(chi_s == doctest::Approx(chi_i).epsilon(1e-10));
        CHECK(chi_t < 100.0 / t); // bounded by the Curie value
    }
    SUBCASE("strictly between chi_I and chi_T for the hyperfine species") {
        const double b = 0.05, t = 2.1;
        const double chi_t = chi_isothermal(apical, b, t);
        const double chi_s = chi_adiabatic(apical, b, t);
        const double chi_i = chi_isolated(apical, Populations::boltzmann(apical, b, t), b);
        CHECK(chi_s < 0.999 * chi_t);
        CHECK(chi_s > 1.001 * chi_i);
    }
    SUBCASE("high-temperature deficit approaches its series limit") {
        // chi_T - chi_S -> chi_T (mu k B)^2 / (A^2 <m^2> + (mu k B)^2 + Delta^2)
        // with <m^2> = 5.25 for I = 7/2; checked at T = 1e2 and 1e3 K
        const double b = 0.01;
        const double h2 = std::pow(9.5 * k_conv * b, 2);
        const double limit = h2 / (0.2945 * 0.2945 * 5.25 + h2 + 0.015 * 0.015);
        const double r100 = (chi_isothermal(apical, b, 100.0) -
                             chi_adiabatic(apical, b, 100.0)) /
                            chi_isothermal(apical, b, 100.0);
        const double r1000 = (chi_isothermal(apical, b, 1000.0) -
                              chi_adiabatic(apical, b, 1000.0)) /
                             chi_isothermal(apical, b, 1000.0);
        CHECK(r100 == doctest::Approx(limit).epsilon(1e-3));
        CHECK(r1000 == doctest::Approx(limit).epsilon(1e-5));
        CHECK(std::abs(r1000 - limit) < 0.02 * std::abs(r100 - limit));
    }
}

TEST_CASE("isolated susceptibility") {
    SUBCASE("two-state matches the closed form everywhere") {
        const SpinSpecies s = two_state_species(10.0, 0.05);
        for (double b : {0.0, 0.002, 0.01, 0.05})
            for (double t : {0.05, 0.5, 5.0}) {
                const auto pops = Populations::boltzmann(s, b, t);
                CHECK(chi_isolated(s, pops, b) ==
                      doctest::Approx(two_state_chi_I_oracle(10.0, 0.05, b, t))
                          .epsilon(1e-10));
            }
    }
    SUBCASE("high-temperature Lorentzian across the peak core") {
        const double delta = 0.05, t = 100.0 * delta, mu = 10.0;
        const SpinSpecies s = two_state_species(mu, delta);
        const double b_half = delta / (mu * k_conv); // |h| = Delta
        for (int i = 0; i <= 20; ++i) {
            const double b = -b_half + 2.0 * b_half * i / 20.0;
            const auto pops = Populations::boltzmann(s, b, t);
            CHECK(chi_isolated(s, pops, b) ==
                  doctest::Approx(lorentzian_oracle(mu, delta, b, t)).epsilon(1e-4));
        }
    }
    SUBCASE("all three susceptibilities coincide at the two-state crossing") {
        const SpinSpecies s = two_state_species(10.0, 0.05);
        for (double t : {0.1, 1.0, 10.0}) {
            const double chi_t = chi_isothermal(s, 0.0, t);
            CHECK(chi_adiabatic(s, 0.0, t) == doctest::Approx(chi_t).epsilon(1e-10));
            CHECK(chi_isolated(s, Populations::boltzmann(s, 0.0, t), 0.0) ==
                  doctest::Approx(chi_t).epsilon(1e-10));
        }
    }
    SUBCASE("near-uniform populations give four equal-height peaks") {
        const double t = 1e4;
        std::vector<double> heights;
        for (int n = 0; n < 4; ++n) {
            const double b = apical.hyperfine_A * (n + 0.5) / (9.5 * k_conv);
            heights.push_back(
                chi_isolated(apical, Populations::boltzmann(apical, b, t), b));
        }
        for (int n = 1; n < 4; ++n)
            CHECK(heights[n] == doctest::Approx(heights[0]).epsilon(0.01));
    }
    SUBCASE("works with frozen populations at any field") {
        const auto frozen = Populations::frozen(apical, 0.0, 0.076);
        const double b4 = apical.hyperfine_A * 3.5 / (9.5 * k_conv);
        const double b1 = apical.hyperfine_A * 0.5 / (9.5 * k_conv);
        CHECK(chi_isolated(apical, frozen, b4) > 100.0 * chi_isolated(apical, frozen, b1));
    }
}

TEST_CASE("Kubo pair form") {
    SUBCASE("two-state zero field: single pair with |<+|mu|->|^2 = mu^2") {
        const SpinSpecies s = two_state_species(10.0, 0.05);
        for (double t : {0.05, 0.5, 5.0})
            CHECK(chi_isolated_kubo(s, t, 0.0) ==
                  doctest::Approx(100.0 / 0.05 * std::tanh(0.05 / t)).epsilon(1e-12));
    }
    SUBCASE("agrees with the population form over a random grid") {
        std::mt19937 rng(112358);
        std::uniform_real_distribution<double> fb(-0.2, 0.2), ft(0.3, 20.0);
        for (int i = 0; i < 200; ++i) {
            const double b = fb(rng), t = ft(rng);
            const double direct =
                chi_isolated(apical, Populations::boltzmann(apical, b, t), b);
            const double kubo = chi_isolated_kubo(apical, t, b);
            CHECK(std::abs(kubo - direct) <= 1e-8 * std::abs(direct));
        }
    }
    SUBCASE("agrees at a direct-crossing field where blocks are degenerate") {
        // cross-block matrix elements vanish, so the excluded degenerate pairs
        // contribute nothing
        const double b_direct = apical.hyperfine_A * 2.0 / (9.5 * k_conv); // m+m' = -4
        const double direct =
            chi_isolated(apical, Populations::boltzmann(apical, b_direct, 2.1), b_direct);
        CHECK(chi_isolated_kubo(apical, 2.1, b_direct) ==
              doctest::Approx(direct).epsilon(1e-10));
        // and at zero field, where every block is doubly degenerate
        const double d0 = chi_isolated(apical, Populations::boltzmann(apical, 0.0, 2.1), 0.0);
        CHECK(chi_isolated_kubo(apical, 2.1, 0.0) == doctest::Approx(d0).epsilon(1e-10));
    }
}

TEST_CASE("ordering chi_T >= chi_S >= chi_I >= 0") {
    for (double t : {0.5, 2.1, 10.0}) {
        for (int i = 0; i <= 80; ++i) {
            const double b = -0.2 + 0.005 * i;
            const double chi_t = chi_isothermal(apical, b, t);
            const double chi_s = chi_adiabatic(apical, b, t);
            const double chi_i =
                chi_isolated(apical, Populations::boltzmann(apical, b, t), b);
            CHECK(chi_t - chi_s >= -1e-10 * chi_t);
            CHECK(chi_s - chi_i >= -1e-10 * chi_t);
            CHECK(chi_i >= -1e-12 * chi_t);
        }
    }
}

TEST_CASE("curves are even in field for Boltzmann populations") {
    for (double b : {0.0115, 0.0231, 0.1, 0.18}) {
        CHECK(chi_isothermal(apical, b, 2.1) ==
              doctest::Approx(chi_isothermal(apical, -b, 2.1)).epsilon(1e-12));
        CHECK(chi_adiabatic(apical, b, 2.1) ==
              doctest::Approx(chi_adiabatic(apical, -b, 2.1)).epsilon(1e-12));
        CHECK(chi_isolated(apical, Populations::boltzmann(apical, b, 2.1), b) ==
              doctest::Approx(chi_isolated(apical, Populations::boltzmann(apical, -b, 2.1), -b))
                  .epsilon(1e-12));
    }
}

TEST_CASE("vanishing heat capacity is signalled, not divided by") {
    // at temperatures far above every level the energy variance underflows
    CHECK_THROWS_AS(chi_adiabatic(apical, 0.05, 1e200), ZeroHeatCapacityError);
}

TEST_CASE("finite-amplitude response") {
    const SpinSpecies narrow = two_state_species(9.5, 0.001);
    const SpinSpecies wide = two_state_species(9.5, 0.1);
    const double t = 2.1;

    SUBCASE("reduces to the quasi-static value as b -> 0") {
        const auto pops = Populations::frozen(narrow, 0.0, t);
        const double stat = chi_isolated(narrow, pops, 0.0);
        const double fin = chi_isolated_finite_amplitude(narrow, pops, 0.0, 1e-6);
        CHECK(fin == doctest::Approx(stat).epsilon(1e-4));
    }
    SUBCASE("suppressed well below the static value for a narrow gap at 0.2 mT") {
        const auto pops = Populations::frozen(narrow, 0.0, t);
        const double ratio = chi_isolated_finite_amplitude(narrow, pops, 0.0, 2e-4) /
                             chi_isolated(narrow, pops, 0.0);
        CHECK(ratio < 0.8);
        CHECK(ratio > 0.0);
    }
    SUBCASE("suppression below 1% for a wide gap at 0.2 mT") {
        const auto pops = Populations::frozen(wide, 0.0, t);
        const double ratio = chi_isolated_finite_amplitude(wide, pops, 0.0, 2e-4) /
                             chi_isolated(wide, pops, 0.0);
        CHECK(ratio > 0.99);
    }
    SUBCASE("monotonically non-increasing in the amplitude at the crossing") {
        const auto pops = Populations::frozen(narrow, 0.0, t);
        double last = chi_isolated(narrow, pops, 0.0);
        for (double b : {1e-6, 5e-5, 2e-4, 1e-3, 5e-3}) {
            const double v = chi_isolated_finite_amplitude(narrow, pops, 0.0, b);
            CHECK(v <= last * (1.0 + 1e-12));
            last = v;
        }
    }
    SUBCASE("quadrature matches a dense Simpson oracle") {
        const auto pops = Populations::frozen(narrow, 0.0, t);
        const double b = 2e-4;
        // independent demodulation: Simpson rule with 4096 intervals
        const int n = 4096;
        double integral = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double phi = 2.0 * M_PI * i / n;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            double mag = 0.0;
            const auto labels = state_labels(narrow);
            for (std::size_t j = 0; j < labels.size(); ++j) {
                const double h = 9.5 * k_conv * (b * std::sin(phi));
                const double e = std::hypot(h, 0.001);
                const double m = (labels[j].branch == Branch::plus ? -1.0 : 1.0) * 9.5 * h / e;
                mag += pops[static_cast<int>(j)] * m;
            }
            integral += w * mag * std::sin(phi);
        }
        integral *= (2.0 * M_PI / n) / 3.0;
        const double oracle = integral / (M_PI * b * k_conv);
        CHECK(chi_isolated_finite_amplitude(narrow, pops, 0.0, b) ==
              doctest::Approx(oracle).epsilon(1e-8));
    }
    SUBCASE("rejects non-positive amplitudes") {
        const auto pops = Populations::frozen(narrow, 0.0, t);
        CHECK_THROWS_AS(chi_isolated_finite_amplitude(narrow, pops, 0.0, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("plateau model") {
    const double chi_t = 1.0, chi_s = 0.6, chi_i = 0.25;
    const double tau1 = 1.0, tau2 = 1e-6;
    SUBCASE("limits") {
        CHECK(plateau_model(chi_t, chi_s, chi_i, tau1, tau2, 1e-9).real() ==
              doctest::Approx(chi_t).epsilon(1e-12));
        CHECK(plateau_model(chi_t, chi_s, chi_i, tau1, tau2, 1e12).real() ==
              doctest::Approx(chi_i).epsilon(1e-10));
        CHECK(plateau_model(chi_t, chi_s, chi_i, tau1, tau2, 1e-9).imag() ==
              doctest::Approx(0.0).epsilon(1e-8));
    }
    SUBCASE("loss peak of height (chi_T - chi_S)/2 at omega tau1 = 1") {
        const auto chi = plateau_model(chi_t, chi_s, chi_i, tau1, tau2, 1.0);
        CHECK(chi.imag() == doctest::Approx(0.5 * (chi_t - chi_s)).epsilon(1e-5));
    }
    SUBCASE("real part decreases, loss stays non-negative") {
        double last = chi_t + 1.0;
        for (int i = 0; i <= 120; ++i) {
            const double w = std::pow(10.0, -4.0 + 0.1 * i);
            const auto chi = plateau_model(chi_t, chi_s, chi_i, tau1, tau2, w);
            CHECK(chi.real() <= last + 1e-14);
            CHECK(chi.imag() >= 0.0);
            last = chi.real();
        }
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(plateau_model(1.0, 0.6, 0.7, tau1, tau2, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(plateau_model(0.5, 0.6, 0.2, tau1, tau2, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(plateau_model(1.0, 0.6, 0.2, 1e-6, 1.0, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("species curve dispatch") {
    const std::vector<double> grid = {0.0, 0.01, 0.02, 0.03};
    const auto curve = species_curve(apical, grid, ResponseKind::isothermal, 2.1,
                                     PopulationScheme::boltzmann());
    CHECK(curve.value.size() == 4);
    CHECK(curve.value[0] == doctest::Approx(chi_isothermal(apical, 0.0, 2.1)));
    CHECK_THROWS_AS(species_curve(apical, grid, ResponseKind::isothermal, 2.1,
                                  PopulationScheme::frozen(0.0, 0.076)),
                    std::invalid_argument);
    const std::vector<double> bad = {0.0, 0.0, 0.01};
    CHECK_THROWS_AS(species_curve(apical, bad, ResponseKind::isolated, 2.1,
                                  PopulationScheme::boltzmann()),
                    std::invalid_argument);
}
