/// @file exact.hpp
/// @brief Wavepacket reference on a nuclear DVR grid times the adiabatic-Fock basis

#pragma once

#include "cavity.hpp"

#include <vector>

namespace qdpol
{

/// Adiabatic states at every nuclear grid point, phases chained along the grid
struct ExactBasis
{
	DvrGrid nuclear_grid;
	std::vector<AdiabaticSet> sets;
	Index n_el = 0;
	Index n_fock = 0;

	/// adiabatic-Fock channels per grid point
	Index n_channels() const { return n_el * n_fock; }
	Index size() const { return nuclear_grid.n_points * n_channels(); }
};

/// Default nuclear grid: spacing 0.016 on [-8, 8]
inline DvrGrid default_nuclear_grid()
{
	return DvrGrid{-8.0, 8.0, 1001};
}

/// Solves the electronic problem at every nuclear grid point.
/// Throws ContinuityError if consecutive same-index overlaps are not positive.
ExactBasis make_exact_basis(const DvrGrid& electronic, const SmParams& params, const DvrGrid& nuclear, Index n_el, Index n_fock);

/// Largest Hamiltonian dimension accepted by build_total_hamiltonian
inline constexpr Index ExactDimensionCap = 16016;

/// H with flat index k * n_channels + i: blocks delta_kl V(R_k) + T_kl (C_k^T C_l (x) I_fock)
Matrix build_total_hamiltonian(const ExactBasis& basis, const CavityParams& cav, double mass, Index max_dim = ExactDimensionCap);

/// Analytic probability of |chi|^2 outside the grid for a Gaussian of position variance sigma2
double gaussian_tail_mass(const DvrGrid& grid, double R0, double sigma2);

/// Gaussian exp[-M omega0 (R - R0)^2 / 2] in one channel, normalized on the grid.
/// Throws DomainError if the tail mass outside the grid exceeds tail_tol.
Vector initial_wavepacket(const ExactBasis& basis, double R0, double omega0, double mass, Index channel, double tail_tol = 1e-5);

/// Channel populations, norm and energy at each requested time
struct ExactSeries
{
	/// a.u.
	Vector times;
	/// rows are times, columns are channels
	Matrix populations;
	Vector norm;
	/// <H>(t) evaluated with the stored Hamiltonian, not with its spectrum
	Vector energy;
};

/// |Phi(t)> = sum_xi C_xi exp(-i E_xi t) |Psi_xi> from a full eigendecomposition of H
ExactSeries propagate_exact(const Matrix& H, const Vector& psi0, const Vector& times, Index n_channels);

/// Mean and variance of R in a wavepacket laid out like initial_wavepacket
std::pair<double, double> position_moments(const ExactBasis& basis, const Vector& psi);

} // namespace qdpol
