/// @file qd.hpp
/// @brief Quasi-diabatic step: V at both ends in the reference basis, gradient chain, basis hand-off

#pragma once

#include "cavity.hpp"

namespace qdpol
{

/// Everything one nuclear step needs, expressed in the adiabatic-Fock basis of the previous geometry.
/// Overlaps are electronic-sized; the Fock factor is the identity.
struct QdStepData
{
	Matrix v0;
	Matrix v1;
	Matrix grad_v1;
	Matrix s_raw;
	Matrix s_ortho;
	Index n_fock = 1;
};

/// Smallest singular value of the electronic overlap below which a step is rejected
inline constexpr double BasisBreakdownThreshold = 0.1;

/// @param lowdin_on when false, s_ortho is the raw overlap (diagnostics only)
QdStepData build_step(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav, bool lowdin_on = true);

/// The three nonzero gradient blocks at cur, in prev's basis. The photon block has no R-dependence.
Matrix gradient_en(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav);
Matrix gradient_enp(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav);
Matrix gradient_dse(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav);

/// <phi(prev)| d mu / dR |phi(prev)> at cur, via the chain rule through the NAC
Matrix dipole_operator_gradient(const AdiabaticSet& prev, const AdiabaticSet& cur);

/// V(cur) rotated into prev's basis
Matrix v_in_reference_basis(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav);

/// Linear interpolation between v0 at t0 and v1 at t1
Matrix interpolate_v(const QdStepData& step, double t0, double t1, double t);

/// Closest orthogonal matrix s (s^T s)^{-1/2}
Matrix lowdin(const Matrix& s_raw);

/// new_j = sum_i old_i S_ij for a dense full-space overlap
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> transfer_vector(
	const Matrix& s_full,
	const Eigen::MatrixBase<Derived>& v)
{
	using Scalar = typename Derived::Scalar;
	if (s_full.rows() != v.size())
	{
		throw ShapeError("transfer_vector: dimension mismatch");
	}
	return s_full.transpose().template cast<Scalar>() * v;
}

/// Same hand-off with the overlap given as S_el (x) I_fock
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> transfer_vector(
	const Matrix& s_el,
	Index n_fock,
	const Eigen::MatrixBase<Derived>& v)
{
	using Scalar = typename Derived::Scalar;
	using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
	const Index n_el = s_el.rows();
	if (s_el.cols() != n_el || v.size() != n_el * n_fock)
	{
		throw ShapeError("transfer_vector: dimension mismatch");
	}
	const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vv = v;
	// column alpha holds the Fock components of electronic state alpha
	const Eigen::Map<const Dense> x(vv.data(), n_fock, n_el);
	Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n_el * n_fock);
	Eigen::Map<Dense>(out.data(), n_fock, n_el) = x * s_el.template cast<Scalar>();
	return out;
}

} // namespace qdpol
