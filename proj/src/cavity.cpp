/// @file cavity.cpp
/// @brief Pauli-Fierz blocks and polariton diagonalization

#include "qdpol/cavity.hpp"

#include <cmath>

namespace qdpol
{

void CavityParams::validate() const
{
	if (!(omega_c > 0) || !(g_c >= 0) || n_fock < 1)
	{
		throw DomainError("CavityParams: need omega_c > 0, g_c >= 0, n_fock >= 1");
	}
	if (!polarization_aligned)
	{
		throw DomainError("CavityParams: only a polarization aligned with the dipole is supported");
	}
}

/// a + a^dagger
static Matrix ladder_sum(Index n_fock)
{
	const Matrix a = annihilation(n_fock);
	return a + a.transpose();
}

Matrix dse_block(const Matrix& mu, const CavityParams& cav)
{
	return (cav.g_c * cav.g_c / cav.omega_c) * (mu * mu);
}

Matrix assemble_v(const Matrix& h_el, const Matrix& mu, const CavityParams& cav)
{
	cav.validate();
	if (h_el.rows() != mu.rows() || h_el.cols() != mu.cols() || h_el.rows() != h_el.cols())
	{
		throw ShapeError("assemble_v: electronic blocks differ in shape");
	}
	const Index nf = cav.n_fock;
	const Index ne = h_el.rows();
	Vector photon(nf);
	for (Index n = 0; n < nf; n++)
	{
		photon(n) = cav.omega_c * (static_cast<double>(n) + 0.5);
	}
	const Matrix id_el = Matrix::Identity(ne, ne);
	const Matrix id_f = Matrix::Identity(nf, nf);
	Matrix v = kron(h_el + dse_block(mu, cav), id_f)
		+ kron(id_el, Matrix(photon.asDiagonal()))
		+ cav.g_c * kron(mu, ladder_sum(nf));
	return 0.5 * (v + v.transpose());
}

Matrix assemble_grad_v(const Matrix& dh_el, const Matrix& dmu, const Matrix& mu, const CavityParams& cav)
{
	cav.validate();
	const Index nf = cav.n_fock;
	const double k = cav.g_c * cav.g_c / cav.omega_c;
	const Matrix dd = k * (dmu * mu + mu * dmu);
	Matrix g = kron(dh_el + dd, Matrix::Identity(nf, nf)) + cav.g_c * kron(dmu, ladder_sum(nf));
	return 0.5 * (g + g.transpose());
}

Matrix build_v_matrix(const AdiabaticSet& set, const CavityParams& cav)
{
	return assemble_v(Matrix(set.energies.asDiagonal()), set.dipole, cav);
}

PolaritonMatrices polariton_eigen(const Matrix& v, Index n_fock, const Matrix* reference)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(v);
	if (es.info() != Eigen::Success)
	{
		throw NumericalError("polariton eigensolver failed");
	}
	PolaritonMatrices m;
	m.v = v;
	m.eigvals = es.eigenvalues();
	m.eigvecs = es.eigenvectors();
	m.n_fock = n_fock;
	for (Index j = 0; j < m.eigvecs.cols(); j++)
	{
		double s;
		if (reference != nullptr)
		{
			s = reference->col(j).dot(m.eigvecs.col(j));
		}
		else
		{
			Index imax;
			m.eigvecs.col(j).cwiseAbs().maxCoeff(&imax);
			s = m.eigvecs(imax, j);
		}
		if (s < 0)
		{
			m.eigvecs.col(j) *= -1.0;
		}
	}
	return m;
}

double photon_number_expectation(const PolaritonMatrices& m, Index J)
{
	if (J < 0 || J >= m.eigvecs.cols())
	{
		throw DomainError("photon_number_expectation: state index out of range");
	}
	double nbar = 0.0;
	for (Index i = 0; i < m.eigvecs.rows(); i++)
	{
		const double c = m.eigvecs(i, J);
		nbar += static_cast<double>(i % m.n_fock) * c * c;
	}
	return nbar;
}

Matrix adiabatic_fock_gradient(const AdiabaticSet& set, const CavityParams& cav)
{
	if (set.dipole_grad.size() == 0)
	{
		throw ShapeError("adiabatic_fock_gradient: dipole gradient missing");
	}
	const Matrix& d = set.nac;
	const Matrix dmu = set.dipole_grad + d * set.dipole - set.dipole * d;
	return assemble_grad_v(set.hf_grad, dmu, set.dipole, cav);
}

} // namespace qdpol
