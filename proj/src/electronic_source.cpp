/// @file electronic_source.cpp
/// @brief Direct and tabulated electronic sources

#include "qdpol/electronic_source.hpp"

#include <cmath>
#include <string>

namespace qdpol
{

void apply_signs(AdiabaticSet& set, const Vector& signs)
{
	if ((signs.array() > 0).all())
	{
		return;
	}
	const Matrix ss = signs * signs.transpose();
	for (Index a = 0; a < signs.size(); a++)
	{
		set.coeffs.col(a) *= signs(a);
	}
	set.dipole = set.dipole.cwiseProduct(ss);
	set.hf_grad = set.hf_grad.cwiseProduct(ss);
	set.nac = set.nac.cwiseProduct(ss);
	if (set.dipole_grad.size() != 0)
	{
		set.dipole_grad = set.dipole_grad.cwiseProduct(ss);
	}
}

DirectDvrSource::DirectDvrSource(DvrGrid grid, SmParams params, Index n_states, double delta_R)
	: grid_(grid), params_(params), n_states_(n_states), delta_R_(delta_R)
{
	grid_.validate();
	params_.validate();
}

AdiabaticSet DirectDvrSource::at(double R, const AdiabaticSet* phase_reference) const
{
	AdiabaticSet set = solve_adiabatic(grid_, params_, R, n_states_, phase_reference);
	set.dipole_grad = dipole_derivative(grid_, params_, R, delta_R_, set);
	return set;
}

ExactDerivatives exact_derivatives(const DvrGrid& grid, const SmParams& params, double R, Index ns, const Matrix* phase_reference)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(build_electronic_hamiltonian(grid, params, R));
	if (es.info() != Eigen::Success)
	{
		throw NumericalError("electronic eigensolver failed at R = " + std::to_string(R));
	}
	const Index n = grid.n_points;
	Matrix c_full = es.eigenvectors();
	const Vector& e_full = es.eigenvalues();

	ExactDerivatives out;
	AdiabaticSet& s = out.set;
	s.geometry_R = R;
	s.energies = e_full.head(ns);
	s.coeffs = c_full.leftCols(ns);
	align_phases(s.coeffs, phase_reference);
	c_full.leftCols(ns) = s.coeffs;

	Vector w(n);
	for (Index i = 0; i < n; i++)
	{
		w(i) = sm_potential_dR(grid.point(i), R, params);
	}
	// <kappa| dH |alpha> over the whole spectrum, columns restricted to the kept states
	const Matrix hf_cols = c_full.transpose() * (w.asDiagonal() * s.coeffs);
	Matrix coef = Matrix::Zero(n, ns);
	for (Index a = 0; a < ns; a++)
	{
		for (Index k = 0; k < n; k++)
		{
			if (k == a)
			{
				continue;
			}
			const double gap = e_full(a) - e_full(k);
			if (std::abs(gap) < 1e-12)
			{
				throw DegeneracyError("degenerate electronic states at R = " + std::to_string(R));
			}
			coef(k, a) = hf_cols(k, a) / gap;
		}
	}
	out.dc = c_full * coef;

	s.dipole = dipole_matrix(s.coeffs, grid, R);
	s.hf_grad = hf_cols.topRows(ns);
	s.hf_grad = 0.5 * (s.hf_grad + s.hf_grad.transpose()).eval();
	s.nac = nac_from_hf(s.hf_grad, s.energies);

	const Vector x = Vector::Constant(n, R) - grid.points();
	const Matrix t = out.dc.transpose() * x.asDiagonal() * s.coeffs;
	out.dmu = t + t.transpose() + s.coeffs.transpose() * s.coeffs;
	s.dipole_grad = out.dmu;
	return out;
}

TabulatedDvrSource::TabulatedDvrSource(DvrGrid grid, SmParams params, Index n_states, double R_min, double R_max, double h)
	: grid_(grid), params_(params), n_states_(n_states), R_min_(R_min), R_max_(R_max)
{
	grid_.validate();
	params_.validate();
	if (!(R_max > R_min) || !(h > 0))
	{
		throw DomainError("TabulatedDvrSource: need R_max > R_min and h > 0");
	}
	const Index n_int = std::max<Index>(1, static_cast<Index>(std::ceil((R_max - R_min) / h - 1e-9)));
	h_ = (R_max - R_min) / static_cast<double>(n_int);
	nodes_.reserve(static_cast<std::size_t>(n_int + 1));
	const Matrix* ref = nullptr;
	for (Index k = 0; k <= n_int; k++)
	{
		const double R = R_min + static_cast<double>(k) * h_;
		ExactDerivatives ed = exact_derivatives(grid_, params_, R, n_states_, ref);
		Node node;
		node.e = ed.set.energies;
		node.de = ed.set.hf_grad.diagonal();
		node.mu = ed.set.dipole;
		node.dmu = ed.dmu;
		node.c = ed.set.coeffs;
		node.dc = ed.dc;
		nodes_.push_back(std::move(node));
		ref = &nodes_.back().c;
	}
}

AdiabaticSet TabulatedDvrSource::at(double R, const AdiabaticSet* phase_reference) const
{
	if (!(R >= R_min_ && R <= R_max_))
	{
		throw DomainError("geometry R = " + std::to_string(R) + " outside the electronic table");
	}
	const double u = (R - R_min_) / h_;
	const Index k = std::min<Index>(static_cast<Index>(u), static_cast<Index>(nodes_.size()) - 2);
	const double t = u - static_cast<double>(k);
	const Node& a = nodes_[static_cast<std::size_t>(k)];
	const Node& b = nodes_[static_cast<std::size_t>(k + 1)];

	const double t2 = t * t, t3 = t2 * t;
	const double h00 = 2 * t3 - 3 * t2 + 1, h10 = (t3 - 2 * t2 + t) * h_;
	const double h01 = -2 * t3 + 3 * t2, h11 = (t3 - t2) * h_;
	const double g00 = (6 * t2 - 6 * t) / h_, g10 = 3 * t2 - 4 * t + 1;
	const double g01 = (-6 * t2 + 6 * t) / h_, g11 = 3 * t2 - 2 * t;

	AdiabaticSet s;
	s.geometry_R = R;
	s.energies = h00 * a.e + h10 * a.de + h01 * b.e + h11 * b.de;
	const Vector de = g00 * a.e + g10 * a.de + g01 * b.e + g11 * b.de;
	s.dipole = h00 * a.mu + h10 * a.dmu + h01 * b.mu + h11 * b.dmu;
	s.dipole_grad = g00 * a.mu + g10 * a.dmu + g01 * b.mu + g11 * b.dmu;
	s.coeffs = h00 * a.c + h10 * a.dc + h01 * b.c + h11 * b.dc;
	const Matrix dc = g00 * a.c + g10 * a.dc + g01 * b.c + g11 * b.dc;

	const Matrix cd = s.coeffs.transpose() * dc;
	s.nac = 0.5 * (cd - cd.transpose());
	// symmetric re-orthonormalization of the O(h^4) drift: one Newton-Schulz step of (C^T C)^{-1/2}
	const Matrix gram = s.coeffs.transpose() * s.coeffs;
	s.coeffs = s.coeffs * (1.5 * Matrix::Identity(n_states_, n_states_) - 0.5 * gram);
	s.hf_grad = Matrix::Zero(n_states_, n_states_);
	for (Index l = 0; l < n_states_; l++)
	{
		s.hf_grad(l, l) = de(l);
		for (Index v = 0; v < n_states_; v++)
		{
			if (v != l)
			{
				s.hf_grad(l, v) = s.nac(l, v) * (s.energies(v) - s.energies(l));
			}
		}
	}
	s.hf_grad = 0.5 * (s.hf_grad + s.hf_grad.transpose()).eval();

	if (phase_reference != nullptr)
	{
		Matrix probe = s.coeffs;
		apply_signs(s, align_phases(probe, &phase_reference->coeffs));
	}
	return s;
}

} // namespace qdpol
