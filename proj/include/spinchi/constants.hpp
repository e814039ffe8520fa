#pragma once

// Internal unit system: energies in kelvin (E/k_B), magnetic fields in tesla,
// magnetic moments in Bohr magnetons, susceptibilities per ion in units of
// mu_B^2/k_B per kelvin.
namespace spinchi::constants {

// CODATA 2018
inline constexpr double bohr_magneton_J_per_T = 9.2740100783e-24;
inline constexpr double boltzmann_J_per_K = 1.380649e-23;
inline constexpr double vacuum_permeability_T_m_per_A = 1.25663706212e-6;

// The one conversion constant of the toolkit: (moment in mu_B) x (field in T)
// x this = energy in kelvin.  Approximately 0.67171 K/T.
inline constexpr double mu_B_per_k_B_K_per_T =
    bohr_magneton_J_per_T / boltzmann_J_per_K;

// Per-ion reduced susceptibility x number density (m^-3) x this = dimensionless
// SI volume susceptibility.
inline constexpr double si_volume_factor_m3_K =
    vacuum_permeability_T_m_per_A * bohr_magneton_J_per_T *
    bohr_magneton_J_per_T / boltzmann_J_per_K;

} // namespace spinchi::constants
