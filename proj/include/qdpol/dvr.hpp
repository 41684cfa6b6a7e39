/// @file dvr.hpp
/// @brief Sinc-DVR solver for the asymmetric Shin-Metiu electronic problem

#pragma once

#include "types.hpp"

#include <optional>
#include <utility>

namespace qdpol
{

/// Uniform 1-D grid, shared by the electron and the nucleus
struct DvrGrid
{
	double r_min = -22.0;
	double r_max = 22.0;
	Index n_points = 300;

	double spacing() const { return (r_max - r_min) / static_cast<double>(n_points - 1); }
	double point(Index i) const { return r_min + static_cast<double>(i) * spacing(); }
	Vector points() const;
	/// throws DomainError unless n_points >= 2 and r_max > r_min
	void validate() const;
	/// the same range with twice the number of intervals
	DvrGrid refined() const;

	bool operator==(const DvrGrid&) const = default;
};

/// Shin-Metiu model constants in a.u.
struct SmParams
{
	double L = 19.0;
	double a_plus = 3.1;
	double a_minus = 4.0;
	double a_f = 5.0;
	double mass_M = 1836.0;
	double electron_mass = 1.0;

	void validate() const;
};

/// Per-geometry electronic eigendata. Columns of coeffs are states.
struct AdiabaticSet
{
	double geometry_R = 0.0;
	Vector energies;
	Matrix coeffs;
	Matrix dipole;
	Matrix hf_grad;
	Matrix nac;
	/// d mu / dR in the adiabatic basis; empty until filled by an electronic source
	Matrix dipole_grad;

	Index n_states() const { return energies.size(); }
};

/// Sinc-DVR kinetic matrix with the finite-N prefactors
Matrix sinc_dvr_kinetic(const DvrGrid& grid, double mass);

/// Electron-nucleus potential plus proton-ion repulsion at electron position r
double sm_potential(double r, double R, const SmParams& params);

/// d/dR of sm_potential at fixed r
double sm_potential_dR(double r, double R, const SmParams& params);

/// Proton-ion repulsion alone
double sm_nuclear_repulsion(double R, const SmParams& params);

Matrix build_electronic_hamiltonian(const DvrGrid& grid, const SmParams& params, double R);

/// Dipole matrix (R - r) in the span of the coefficient columns
Matrix dipole_matrix(const Matrix& coeffs, const DvrGrid& grid, double R);
inline Matrix dipole_matrix(const AdiabaticSet& set, const DvrGrid& grid)
{
	return dipole_matrix(set.coeffs, grid, set.geometry_R);
}

/// Hellmann-Feynman matrix and NAC of the given states
std::pair<Matrix, Matrix> hellmann_feynman(const AdiabaticSet& set, const DvrGrid& grid, const SmParams& params, double R);

/// Converts a Hellmann-Feynman matrix into the NAC; throws DegeneracyError on a gap below tol
Matrix nac_from_hf(const Matrix& hf, const Vector& energies, double tol = 1e-12);

/// S(a, b) = C_a^T C_b
Matrix state_overlap(const AdiabaticSet& a, const AdiabaticSet& b);

/// Flips column signs so that same-index overlaps with ref are non-negative.
/// Without a reference, the first significant coefficient of each column is made positive.
/// @return the applied signs
Vector align_phases(Matrix& coeffs, const Matrix* ref, double min_overlap = 0.0);

/// Full solve: lowest n_states eigenpairs with dipole, HF gradient and NAC filled
AdiabaticSet solve_adiabatic(
	const DvrGrid& grid,
	const SmParams& params,
	double R,
	Index n_states,
	const AdiabaticSet* phase_reference = nullptr);

/// Central finite difference of the dipole matrix, both sides aligned to phase_reference
Matrix dipole_derivative(
	const DvrGrid& grid,
	const SmParams& params,
	double R,
	double delta_R,
	const AdiabaticSet& phase_reference);

} // namespace qdpol
