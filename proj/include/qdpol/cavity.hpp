/// @file cavity.hpp
/// @brief Pauli-Fierz potential in the adiabatic-Fock basis and polariton states

#pragma once

#include "dvr.hpp"

#include <utility>

namespace qdpol
{

/// Single cavity mode. The polarization is taken along the molecular dipole.
struct CavityParams
{
	double omega_c = 0.1;
	double g_c = 0.0;
	Index n_fock = 2;
	bool polarization_aligned = true;

	void validate() const;
};

/// Flat index i = alpha * n_fock + n
struct FockBasisIndex
{
	Index n_el;
	Index n_fock;

	Index size() const { return n_el * n_fock; }
	Index flat(Index alpha, Index n) const { return alpha * n_fock + n; }
	std::pair<Index, Index> split(Index i) const { return {i / n_fock, i % n_fock}; }
};

/// Photon annihilation operator truncated to n_fock states
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> annihilation(Index n_fock)
{
	Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a
		= Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n_fock, n_fock);
	for (Index n = 1; n < n_fock; n++)
	{
		a(n - 1, n) = std::sqrt(static_cast<Scalar>(n));
	}
	return a;
}

/// Kronecker product A (electronic) x B (Fock), matching the alpha-major flat index
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
	const Eigen::MatrixBase<DerivedA>& a,
	const Eigen::MatrixBase<DerivedB>& b)
{
	Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> k(a.rows() * b.rows(), a.cols() * b.cols());
	for (Index i = 0; i < a.rows(); i++)
	{
		for (Index j = 0; j < a.cols(); j++)
		{
			k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
		}
	}
	return k;
}

/// V = H_en + H_p + H_enp + H_d from an electronic Hamiltonian block and a dipole block.
/// h_el need not be diagonal; both blocks are in the same electronic basis.
Matrix assemble_v(const Matrix& h_el, const Matrix& mu, const CavityParams& cav);

/// Same structure for the nuclear gradient: dH_en block, d<mu> block and the dipole itself
Matrix assemble_grad_v(const Matrix& dh_el, const Matrix& dmu, const Matrix& mu, const CavityParams& cav);

/// Dipole self-energy block (g^2/omega) mu mu, summed over the included states
Matrix dse_block(const Matrix& mu, const CavityParams& cav);

Matrix build_v_matrix(const AdiabaticSet& set, const CavityParams& cav);

/// Polariton eigendata of one V matrix
struct PolaritonMatrices
{
	Matrix v;
	Vector eigvals;
	Matrix eigvecs;
	Matrix dse;
	Index n_fock = 1;
};

/// Diagonalizes v. Columns are aligned to reference (non-negative same-index overlap)
/// or, without one, have their largest-magnitude component positive.
PolaritonMatrices polariton_eigen(const Matrix& v, Index n_fock, const Matrix* reference = nullptr);

double photon_number_expectation(const PolaritonMatrices& m, Index J);

/// Gradient matrix <psi_i|dV/dR|psi_j> in the adiabatic-Fock basis at the set's own geometry.
/// Requires hf_grad, nac and dipole_grad.
Matrix adiabatic_fock_gradient(const AdiabaticSet& set, const CavityParams& cav);

} // namespace qdpol
