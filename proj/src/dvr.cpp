/// @file dvr.cpp
/// @brief Implementation of the Shin-Metiu DVR solver

#include "qdpol/dvr.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qdpol
{

static constexpr double Pi = std::numbers::pi;
static constexpr double TwoOverSqrtPi = 2.0 / 1.772453850905516027298167483341;

/// erf(u/a)/u, smooth through u = 0
static double soft_coulomb(double u, double a)
{
	const double z = u / a;
	if (z < 1e-4)
	{
		const double z2 = z * z;
		return TwoOverSqrtPi / a * (1.0 - z2 / 3.0 + z2 * z2 / 10.0);
	}
	return std::erf(z) / u;
}

/// d/du of erf(u/a)/u
static double soft_coulomb_du(double u, double a)
{
	const double z = u / a;
	if (z < 1e-4)
	{
		return TwoOverSqrtPi / (a * a) * (-2.0 * z / 3.0 + 0.4 * z * z * z);
	}
	return (TwoOverSqrtPi / a * std::exp(-z * z) * u - std::erf(z)) / (u * u);
}

Vector DvrGrid::points() const
{
	return Vector::LinSpaced(n_points, r_min, r_max);
}

void DvrGrid::validate() const
{
	if (n_points < 2 || !(r_max > r_min) || !std::isfinite(r_min) || !std::isfinite(r_max))
	{
		throw DomainError("DvrGrid: need n_points >= 2 and r_max > r_min");
	}
}

DvrGrid DvrGrid::refined() const
{
	return DvrGrid{r_min, r_max, 2 * (n_points - 1) + 1};
}

void SmParams::validate() const
{
	if (!(L > 0 && a_plus > 0 && a_minus > 0 && a_f > 0 && mass_M > 0 && electron_mass > 0))
	{
		throw DomainError("SmParams: lengths and masses must be positive");
	}
}

Matrix sinc_dvr_kinetic(const DvrGrid& grid, double mass)
{
	grid.validate();
	const Index n = grid.n_points;
	const double dx = grid.spacing();
	const double nn = static_cast<double>(n);
	const double pref = 1.0 / (2.0 * mass);
	Matrix t(n, n);
	for (Index i = 0; i < n; i++)
	{
		t(i, i) = pref * Pi * Pi / (3.0 * dx * dx) * (1.0 + 2.0 / (nn * nn));
		for (Index j = i + 1; j < n; j++)
		{
			const Index k = j - i;
			const double s = dx * nn * std::sin(Pi * static_cast<double>(k) / nn);
			const double v = pref * 2.0 * Pi * Pi / (s * s);
			t(i, j) = t(j, i) = (k % 2 == 0) ? v : -v;
		}
	}
	return t;
}

double sm_nuclear_repulsion(double R, const SmParams& p)
{
	return 1.0 / std::abs(R + 0.5 * p.L) + 1.0 / std::abs(R - 0.5 * p.L);
}

double sm_potential(double r, double R, const SmParams& p)
{
	const double up = std::abs(r + 0.5 * p.L);
	const double um = std::abs(r - 0.5 * p.L);
	return sm_nuclear_repulsion(R, p)
		- soft_coulomb(up, p.a_plus)
		- soft_coulomb(um, p.a_minus)
		- soft_coulomb(std::abs(R - r), p.a_f);
}

double sm_potential_dR(double r, double R, const SmParams& p)
{
	const double xp = R + 0.5 * p.L;
	const double xm = R - 0.5 * p.L;
	const double x = R - r;
	const double sx = (x < 0) ? -1.0 : 1.0;
	return -std::copysign(1.0, xp) / (xp * xp)
		- std::copysign(1.0, xm) / (xm * xm)
		- sx * soft_coulomb_du(std::abs(x), p.a_f);
}

Matrix build_electronic_hamiltonian(const DvrGrid& grid, const SmParams& params, double R)
{
	params.validate();
	Matrix h = sinc_dvr_kinetic(grid, params.electron_mass);
	for (Index i = 0; i < grid.n_points; i++)
	{
		const double v = sm_potential(grid.point(i), R, params);
		if (!std::isfinite(v))
		{
			throw NumericalError("non-finite Shin-Metiu potential at R = " + std::to_string(R));
		}
		h(i, i) += v;
	}
	return h;
}

Matrix dipole_matrix(const Matrix& coeffs, const DvrGrid& grid, double R)
{
	if (coeffs.rows() != grid.n_points)
	{
		throw ShapeError("dipole_matrix: coefficient rows do not match the grid");
	}
	const Vector x = Vector::Constant(grid.n_points, R) - grid.points();
	Matrix mu = coeffs.transpose() * x.asDiagonal() * coeffs;
	return 0.5 * (mu + mu.transpose());
}

Matrix nac_from_hf(const Matrix& hf, const Vector& energies, double tol)
{
	const Index n = energies.size();
	Matrix d = Matrix::Zero(n, n);
	for (Index l = 0; l < n; l++)
	{
		for (Index v = l + 1; v < n; v++)
		{
			const double gap = energies(v) - energies(l);
			if (std::abs(gap) < tol)
			{
				throw DegeneracyError("states " + std::to_string(l) + " and " + std::to_string(v) + " are degenerate");
			}
			d(l, v) = hf(l, v) / gap;
			d(v, l) = -d(l, v);
		}
	}
	return d;
}

std::pair<Matrix, Matrix> hellmann_feynman(const AdiabaticSet& set, const DvrGrid& grid, const SmParams& params, double R)
{
	if (set.coeffs.rows() != grid.n_points)
	{
		throw ShapeError("hellmann_feynman: coefficient rows do not match the grid");
	}
	Vector w(grid.n_points);
	for (Index i = 0; i < grid.n_points; i++)
	{
		w(i) = sm_potential_dR(grid.point(i), R, params);
	}
	Matrix hf = set.coeffs.transpose() * w.asDiagonal() * set.coeffs;
	hf = 0.5 * (hf + hf.transpose());
	Matrix d = nac_from_hf(hf, set.energies);
	return {std::move(hf), std::move(d)};
}

Matrix state_overlap(const AdiabaticSet& a, const AdiabaticSet& b)
{
	if (a.coeffs.rows() != b.coeffs.rows())
	{
		throw ShapeError("state_overlap: sets live on different grids");
	}
	return a.coeffs.transpose() * b.coeffs;
}

Vector align_phases(Matrix& coeffs, const Matrix* ref, double min_overlap)
{
	Vector signs = Vector::Ones(coeffs.cols());
	for (Index a = 0; a < coeffs.cols(); a++)
	{
		if (ref != nullptr && a < ref->cols())
		{
			const double ov = ref->col(a).dot(coeffs.col(a));
			if (std::abs(ov) < min_overlap)
			{
				throw ContinuityError("phase alignment: overlap " + std::to_string(ov) + " of state " + std::to_string(a));
			}
			if (ov < 0)
			{
				signs(a) = -1.0;
			}
		}
		else
		{
			// first coefficient that is significant on the scale of the column
			const double thresh = 1e-6 * coeffs.col(a).cwiseAbs().maxCoeff();
			for (Index i = 0; i < coeffs.rows(); i++)
			{
				if (std::abs(coeffs(i, a)) > thresh)
				{
					if (coeffs(i, a) < 0)
					{
						signs(a) = -1.0;
					}
					break;
				}
			}
		}
		if (signs(a) < 0)
		{
			coeffs.col(a) *= -1.0;
		}
	}
	return signs;
}

/// Lowest eigenpairs of the electronic Hamiltonian, aligned
static std::pair<Vector, Matrix> lowest_states(
	const DvrGrid& grid,
	const SmParams& params,
	double R,
	Index n_states,
	const Matrix* ref,
	double min_overlap)
{
	if (n_states < 1 || n_states > grid.n_points)
	{
		throw DomainError("solve_adiabatic: n_states out of range");
	}
	Eigen::SelfAdjointEigenSolver<Matrix> es(build_electronic_hamiltonian(grid, params, R));
	if (es.info() != Eigen::Success)
	{
		throw NumericalError("electronic eigensolver failed at R = " + std::to_string(R));
	}
	Vector e = es.eigenvalues().head(n_states);
	Matrix c = es.eigenvectors().leftCols(n_states);
	align_phases(c, ref, min_overlap);
	return {std::move(e), std::move(c)};
}

AdiabaticSet solve_adiabatic(
	const DvrGrid& grid,
	const SmParams& params,
	double R,
	Index n_states,
	const AdiabaticSet* phase_reference)
{
	if (phase_reference != nullptr && phase_reference->coeffs.rows() != grid.n_points)
	{
		throw ShapeError("solve_adiabatic: phase reference lives on another grid");
	}
	AdiabaticSet set;
	set.geometry_R = R;
	auto [e, c] = lowest_states(grid, params, R, n_states, phase_reference ? &phase_reference->coeffs : nullptr, 0.0);
	set.energies = std::move(e);
	set.coeffs = std::move(c);
	set.dipole = dipole_matrix(set.coeffs, grid, R);
	std::tie(set.hf_grad, set.nac) = hellmann_feynman(set, grid, params, R);
	return set;
}

Matrix dipole_derivative(
	const DvrGrid& grid,
	const SmParams& params,
	double R,
	double delta_R,
	const AdiabaticSet& phase_reference)
{
	if (!(delta_R > 0))
	{
		throw DomainError("dipole_derivative: delta_R must be positive");
	}
	const Index n = phase_reference.n_states();
	const auto plus = lowest_states(grid, params, R + delta_R, n, &phase_reference.coeffs, 0.5);
	const auto minus = lowest_states(grid, params, R - delta_R, n, &phase_reference.coeffs, 0.5);
	const Matrix mu_p = dipole_matrix(plus.second, grid, R + delta_R);
	const Matrix mu_m = dipole_matrix(minus.second, grid, R - delta_R);
	return (mu_p - mu_m) / (2.0 * delta_R);
}

} // namespace qdpol
