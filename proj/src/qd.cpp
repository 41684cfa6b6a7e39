/// @file qd.cpp
/// @brief Quasi-diabatic step construction and Lowdin hand-off

#include "qdpol/qd.hpp"

#include <cmath>
#include <string>

namespace qdpol
{

static void check_pair(const AdiabaticSet& prev, const AdiabaticSet& cur)
{
	if (prev.n_states() != cur.n_states() || prev.coeffs.rows() != cur.coeffs.rows())
	{
		throw ShapeError("QD step: sets differ in state count or grid");
	}
	if (cur.dipole_grad.size() == 0)
	{
		throw ShapeError("QD step: dipole gradient missing at the current geometry");
	}
}

Matrix dipole_operator_gradient(const AdiabaticSet& prev, const AdiabaticSet& cur)
{
	check_pair(prev, cur);
	const Matrix s = state_overlap(prev, cur);
	const Matrix& d = cur.nac;
	const Matrix m = cur.dipole_grad + d * cur.dipole - cur.dipole * d;
	return s * m * s.transpose();
}

static Matrix rotated_dipole(const AdiabaticSet& prev, const AdiabaticSet& cur)
{
	const Matrix s = state_overlap(prev, cur);
	return s * cur.dipole * s.transpose();
}

Matrix gradient_en(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav)
{
	check_pair(prev, cur);
	const Matrix s = state_overlap(prev, cur);
	return kron(s * cur.hf_grad * s.transpose(), Matrix::Identity(cav.n_fock, cav.n_fock));
}

Matrix gradient_enp(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav)
{
	const Matrix a = annihilation(cav.n_fock);
	return cav.g_c * kron(dipole_operator_gradient(prev, cur), Matrix(a + a.transpose()));
}

Matrix gradient_dse(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav)
{
	const Matrix dmu = dipole_operator_gradient(prev, cur);
	const Matrix mu = rotated_dipole(prev, cur);
	const double k = cav.g_c * cav.g_c / cav.omega_c;
	return kron(Matrix(k * (dmu * mu + mu * dmu)), Matrix::Identity(cav.n_fock, cav.n_fock));
}

Matrix v_in_reference_basis(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav)
{
	check_pair(prev, cur);
	const Matrix s = state_overlap(prev, cur);
	return assemble_v(s * cur.energies.asDiagonal() * s.transpose(), s * cur.dipole * s.transpose(), cav);
}

QdStepData build_step(const AdiabaticSet& prev, const AdiabaticSet& cur, const CavityParams& cav, bool lowdin_on)
{
	check_pair(prev, cur);
	cav.validate();
	QdStepData step;
	step.n_fock = cav.n_fock;
	step.s_raw = state_overlap(prev, cur);

	// singular values of S are the square roots of the eigenvalues of S^T S
	Eigen::SelfAdjointEigenSolver<Matrix> es(step.s_raw.transpose() * step.s_raw);
	const double smin = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
	if (es.info() != Eigen::Success || smin < BasisBreakdownThreshold)
	{
		throw BasisBreakdownError("QD overlap singular value " + std::to_string(smin) + " between R = "
			+ std::to_string(prev.geometry_R) + " and " + std::to_string(cur.geometry_R));
	}
	if (lowdin_on)
	{
		const Vector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
		step.s_ortho = step.s_raw * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
	}
	else
	{
		step.s_ortho = step.s_raw;
	}

	const Matrix& s = step.s_raw;
	const Matrix mu1 = s * cur.dipole * s.transpose();
	const Matrix& d = cur.nac;
	const Matrix dmu = s * (cur.dipole_grad + d * cur.dipole - cur.dipole * d) * s.transpose();

	step.v0 = build_v_matrix(prev, cav);
	step.v1 = assemble_v(s * cur.energies.asDiagonal() * s.transpose(), mu1, cav);
	step.grad_v1 = assemble_grad_v(s * cur.hf_grad * s.transpose(), dmu, mu1, cav);
	return step;
}

Matrix interpolate_v(const QdStepData& step, double t0, double t1, double t)
{
	if (!(t1 > t0) || t < t0 || t > t1)
	{
		throw DomainError("interpolate_v: t outside [t0, t1]");
	}
	const double f = (t - t0) / (t1 - t0);
	return (1.0 - f) * step.v0 + f * step.v1;
}

Matrix lowdin(const Matrix& s_raw)
{
	if (s_raw.rows() != s_raw.cols())
	{
		throw ShapeError("lowdin: overlap must be square");
	}
	Eigen::SelfAdjointEigenSolver<Matrix> es(s_raw.transpose() * s_raw);
	if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() < 1e-14)
	{
		throw BasisBreakdownError("lowdin: overlap matrix is singular");
	}
	const Vector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
	return s_raw * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace qdpol
