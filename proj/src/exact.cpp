/// @file exact.cpp
/// @brief Full diagonalization of the polariton Hamiltonian on the nuclear grid

#include "qdpol/exact.hpp"

#include <cmath>
#include <string>

namespace qdpol
{

ExactBasis make_exact_basis(const DvrGrid& electronic, const SmParams& params, const DvrGrid& nuclear, Index n_el, Index n_fock)
{
	electronic.validate();
	nuclear.validate();
	if (n_el < 1 || n_fock < 1)
	{
		throw DomainError("make_exact_basis: need at least one electronic and one Fock state");
	}
	ExactBasis b;
	b.nuclear_grid = nuclear;
	b.n_el = n_el;
	b.n_fock = n_fock;
	b.sets.reserve(static_cast<std::size_t>(nuclear.n_points));
	for (Index k = 0; k < nuclear.n_points; k++)
	{
		const AdiabaticSet* ref = b.sets.empty() ? nullptr : &b.sets.back();
		b.sets.push_back(solve_adiabatic(electronic, params, nuclear.point(k), n_el, ref));
		if (ref != nullptr)
		{
			const Vector d = state_overlap(*ref, b.sets.back()).diagonal();
			if (!(d.minCoeff() > 0.0))
			{
				throw ContinuityError("adiabatic phases break between nuclear points " + std::to_string(k - 1) + " and "
					+ std::to_string(k));
			}
		}
	}
	return b;
}

Matrix build_total_hamiltonian(const ExactBasis& basis, const CavityParams& cav, double mass, Index max_dim)
{
	cav.validate();
	if (cav.n_fock != basis.n_fock)
	{
		throw ShapeError("build_total_hamiltonian: Fock truncation differs from the basis");
	}
	const Index dim = basis.size();
	if (dim > max_dim)
	{
		throw DomainError("total Hamiltonian dimension " + std::to_string(dim) + " exceeds the cap " + std::to_string(max_dim));
	}
	const Index nk = basis.nuclear_grid.n_points;
	const Index ne = basis.n_el;
	const Index nf = basis.n_fock;
	const Index nc = basis.n_channels();

	// all electronic states side by side: column k * ne + alpha
	Matrix c_all(basis.sets.front().coeffs.rows(), nk * ne);
	for (Index k = 0; k < nk; k++)
	{
		c_all.middleCols(k * ne, ne) = basis.sets[static_cast<std::size_t>(k)].coeffs;
	}
	const Matrix s_all = c_all.transpose() * c_all;
	const Matrix t_nuc = sinc_dvr_kinetic(basis.nuclear_grid, mass);

	Matrix H = Matrix::Zero(dim, dim);
	for (Index k = 0; k < nk; k++)
	{
		for (Index l = 0; l < nk; l++)
		{
			const double t = t_nuc(k, l);
			for (Index a = 0; a < ne; a++)
			{
				for (Index b = 0; b < ne; b++)
				{
					const double x = t * s_all(k * ne + a, l * ne + b);
					for (Index n = 0; n < nf; n++)
					{
						H(k * nc + a * nf + n, l * nc + b * nf + n) = x;
					}
				}
			}
		}
		H.block(k * nc, k * nc, nc, nc) += build_v_matrix(basis.sets[static_cast<std::size_t>(k)], cav);
	}
	return 0.5 * (H + H.transpose());
}

double gaussian_tail_mass(const DvrGrid& grid, double R0, double sigma2)
{
	const double s = std::sqrt(2.0 * sigma2);
	return 0.5 * std::erfc((R0 - grid.r_min) / s) + 0.5 * std::erfc((grid.r_max - R0) / s);
}

Vector initial_wavepacket(const ExactBasis& basis, double R0, double omega0, double mass, Index channel, double tail_tol)
{
	if (channel < 0 || channel >= basis.n_channels())
	{
		throw DomainError("initial_wavepacket: channel out of range");
	}
	if (!(omega0 > 0) || !(mass > 0))
	{
		throw DomainError("initial_wavepacket: omega0 and mass must be positive");
	}
	const double tail = gaussian_tail_mass(basis.nuclear_grid, R0, 1.0 / (2.0 * mass * omega0));
	if (tail > tail_tol)
	{
		throw DomainError("wavepacket tail mass " + std::to_string(tail) + " outside the nuclear grid exceeds "
			+ std::to_string(tail_tol));
	}
	const Index nc = basis.n_channels();
	Vector psi = Vector::Zero(basis.size());
	for (Index k = 0; k < basis.nuclear_grid.n_points; k++)
	{
		const double x = basis.nuclear_grid.point(k) - R0;
		psi(k * nc + channel) = std::exp(-0.5 * mass * omega0 * x * x);
	}
	psi.normalize();
	return psi;
}

std::pair<double, double> position_moments(const ExactBasis& basis, const Vector& psi)
{
	const Index nc = basis.n_channels();
	double m1 = 0.0, m2 = 0.0;
	for (Index k = 0; k < basis.nuclear_grid.n_points; k++)
	{
		const double w = psi.segment(k * nc, nc).squaredNorm();
		const double R = basis.nuclear_grid.point(k);
		m1 += w * R;
		m2 += w * R * R;
	}
	return {m1, m2 - m1 * m1};
}

ExactSeries propagate_exact(const Matrix& H, const Vector& psi0, const Vector& times, Index n_channels)
{
	if (H.rows() != H.cols() || psi0.size() != H.rows() || n_channels < 1 || H.rows() % n_channels != 0)
	{
		throw ShapeError("propagate_exact: Hamiltonian, wavepacket and channel count disagree");
	}
	Eigen::SelfAdjointEigenSolver<Matrix> es(H);
	if (es.info() != Eigen::Success)
	{
		throw NumericalError("total Hamiltonian eigendecomposition failed");
	}
	const Matrix& xi = es.eigenvectors();
	const Vector& e = es.eigenvalues();
	const Vector c = xi.transpose() * psi0;

	const Index nt = times.size();
	const Index nk = H.rows() / n_channels;
	Matrix a(c.size(), nt), b(c.size(), nt);
	for (Index t = 0; t < nt; t++)
	{
		const Eigen::ArrayXd ph = e.array() * times(t);
		a.col(t) = (c.array() * ph.cos()).matrix();
		b.col(t) = -(c.array() * ph.sin()).matrix();
	}
	// real and imaginary parts of Phi(t) for all times at once
	const Matrix re = xi * a;
	const Matrix im = xi * b;
	const Matrix h_re = H * re;
	const Matrix h_im = H * im;

	ExactSeries out;
	out.times = times;
	out.populations = Matrix::Zero(nt, n_channels);
	out.norm.resize(nt);
	out.energy.resize(nt);
	for (Index t = 0; t < nt; t++)
	{
		const Vector w = re.col(t).array().square() + im.col(t).array().square();
		// row i of the reshaped weights holds channel i at every grid point
		const Eigen::Map<const Matrix> wk(w.data(), n_channels, nk);
		out.populations.row(t) = wk.rowwise().sum().transpose();
		out.norm(t) = w.sum();
		out.energy(t) = re.col(t).dot(h_re.col(t)) + im.col(t).dot(h_im.col(t));
	}
	return out;
}

} // namespace qdpol
