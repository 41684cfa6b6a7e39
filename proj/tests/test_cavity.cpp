/// @file test_cavity.cpp
/// @brief Pauli-Fierz matrix in the adiabatic-Fock basis and polariton eigendata

#include "qdpol/cavity.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace qdpol;

namespace
{

const DvrGrid Electronic{};
const SmParams Model{};

/// V from explicit operators: H_el (x) 1 + 1 (x) w(a^+ a + 1/2) + g mu (x) (a + a^+) + (g^2/w) mu^2 (x) 1
Matrix brute_force_v(const AdiabaticSet& s, const CavityParams& cav)
{
	const Index ne = s.n_states();
	const Index nf = cav.n_fock;
	Matrix a = Matrix::Zero(nf, nf);
	for (Index n = 0; n + 1 < nf; n++)
	{
		a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
	}
	const Matrix adag = a.transpose();
	const Matrix id_f = Matrix::Identity(nf, nf);
	const Matrix id_e = Matrix::Identity(ne, ne);
	const Matrix h_el = s.energies.asDiagonal();
	const Matrix mu2 = s.dipole * s.dipole;
	Matrix v = Matrix::Zero(ne * nf, ne * nf);
	for (Index al = 0; al < ne; al++)
	{
		for (Index be = 0; be < ne; be++)
		{
			for (Index n = 0; n < nf; n++)
			{
				for (Index m = 0; m < nf; m++)
				{
					const Matrix photon = cav.omega_c * (adag * a + 0.5 * id_f);
					const Matrix x = a + adag;
					v(al * nf + n, be * nf + m) = h_el(al, be) * id_f(n, m)
						+ id_e(al, be) * photon(n, m)
						+ cav.g_c * s.dipole(al, be) * x(n, m)
						+ cav.g_c * cav.g_c / cav.omega_c * mu2(al, be) * id_f(n, m);
				}
			}
		}
	}
	return v;
}

/// Smallest gap between the two lowest coupled polariton surfaces that cross at g = 0
double min_splitting(double g)
{
	double best = 1e300;
	for (int k = 0; k <= 100; k++)
	{
		const double R = -5.0 + 0.1 * k;
		const AdiabaticSet s = solve_adiabatic(Electronic, Model, R, 2);
		const Vector e = polariton_eigen(build_v_matrix(s, CavityParams{0.1, g, 2}), 2).eigvals;
		best = std::min(best, e(2) - e(1));
	}
	return best;
}

} // namespace

TEST_CASE("zero coupling gives the uncoupled ladder on the diagonal")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 3);
	const CavityParams cav{0.1, 0.0, 3};
	const Matrix v = build_v_matrix(s, cav);
	Matrix off = v;
	off.diagonal().setZero();
	CHECK(off.cwiseAbs().maxCoeff() == 0.0);
	for (Index a = 0; a < 3; a++)
	{
		for (Index n = 0; n < 3; n++)
		{
			CHECK(std::abs(v(a * 3 + n, a * 3 + n) - (s.energies(a) + 0.1 * (n + 0.5))) < 1e-15);
		}
	}

	std::vector<double> expected;
	for (Index a = 0; a < 3; a++)
	{
		for (Index n = 0; n < 3; n++)
		{
			expected.push_back(s.energies(a) + 0.1 * (n + 0.5));
		}
	}
	std::sort(expected.begin(), expected.end());
	const Vector e = polariton_eigen(v, 3).eigvals;
	for (Index i = 0; i < 9; i++)
	{
		CHECK(std::abs(e(i) - expected[static_cast<std::size_t>(i)]) < 1e-12);
	}
}

TEST_CASE("single electronic state with two Fock states")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 1);
	const CavityParams cav{0.1, 0.005, 2};
	const Matrix v = build_v_matrix(s, cav);
	const double mu = s.dipole(0, 0);
	const double dse = 0.005 * 0.005 / 0.1 * mu * mu;
	CHECK(std::abs(v(0, 0) - (s.energies(0) + 0.05 + dse)) < 1e-15);
	CHECK(std::abs(v(1, 1) - (s.energies(0) + 0.15 + dse)) < 1e-15);
	CHECK(std::abs(v(0, 1) - 0.005 * mu) < 1e-15);
	CHECK(dse_block(s.dipole, cav)(0, 0) >= 0.0);
}

TEST_CASE("assembled V equals an explicit operator-algebra construction")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 2);
	for (Index nf : {2, 4})
	{
		const CavityParams cav{0.1, 0.001, nf};
		const Matrix v = build_v_matrix(s, cav);
		CHECK((v - brute_force_v(s, cav)).cwiseAbs().maxCoeff() < 1e-14);
		CHECK((v - v.transpose()).cwiseAbs().maxCoeff() < 1e-14);
	}
}

TEST_CASE("diagonal input gives the identity eigenvector matrix")
{
	Matrix v = Matrix::Zero(4, 4);
	v.diagonal() << 0.1, 0.2, 0.3, 0.4;
	const PolaritonMatrices p = polariton_eigen(v, 2);
	CHECK((p.eigvecs - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("coupled e0/g1 pair matches the closed-form two-level splitting")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 2);
	const double g = 0.001, w = 0.1;
	const double a = s.energies(1) + 0.5 * w;
	const double b = s.energies(0) + 1.5 * w;
	const double c = g * s.dipole(0, 1);
	Matrix v(2, 2);
	v << a, c, c, b;
	const Vector e = polariton_eigen(v, 1).eigvals;
	const double mean = 0.5 * (a + b);
	const double half = std::sqrt(0.25 * (a - b) * (a - b) + c * c);
	CHECK(std::abs(e(0) - (mean - half)) < 1e-12);
	CHECK(std::abs(e(1) - (mean + half)) < 1e-12);
}

TEST_CASE("stronger coupling opens larger avoided crossings")
{
	const double weak = min_splitting(0.001);
	const double strong = min_splitting(0.005);
	MESSAGE("minimum splitting of the two middle surfaces: g = 0.001 -> " << weak << ", g = 0.005 -> " << strong);
	CHECK(strong > weak);
}

TEST_CASE("polariton eigendata is orthonormal and phase-fixed")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, 1.9, 2);
	const CavityParams cav{0.1, 0.005, 3};
	const PolaritonMatrices p = polariton_eigen(build_v_matrix(s, cav), 3);
	CHECK((p.eigvecs.transpose() * p.eigvecs - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
	CHECK((p.eigvecs * p.eigvals.asDiagonal() * p.eigvecs.transpose() - p.v).cwiseAbs().maxCoeff() < 1e-12);
	for (Index j = 0; j < 6; j++)
	{
		Index imax;
		p.eigvecs.col(j).cwiseAbs().maxCoeff(&imax);
		CHECK(p.eigvecs(imax, j) > 0.0);
	}
	Matrix ref = p.eigvecs;
	ref.col(2) *= -1.0;
	const PolaritonMatrices q = polariton_eigen(p.v, 3, &ref);
	CHECK(q.eigvecs.col(2).dot(ref.col(2)) > 0.0);
}

TEST_CASE("photon number expectation")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 2);
	const PolaritonMatrices p0 = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.0, 3}), 3);
	CHECK(photon_number_expectation(p0, 0) == 0.0);
	const PolaritonMatrices p = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.005, 3}), 3);
	for (Index j = 0; j < 6; j++)
	{
		const double n = photon_number_expectation(p, j);
		CHECK(n >= 0.0);
		CHECK(n <= 2.0);
	}
	CHECK_THROWS_AS(photon_number_expectation(p, 6), DomainError);
}

TEST_CASE("dipole self-energy block is positive semidefinite")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, 0.5, 3);
	const Matrix d = dse_block(s.dipole, CavityParams{0.1, 0.005, 2});
	Eigen::SelfAdjointEigenSolver<Matrix> es(d);
	CHECK(es.eigenvalues().minCoeff() > -1e-15);
}

TEST_CASE("growing the Fock space from 2 to 3")
{
	double ground = 0.0, excited = 0.0;
	for (int k = 0; k <= 40; k++)
	{
		const double R = -5.0 + 0.25 * k;
		const AdiabaticSet s = solve_adiabatic(Electronic, Model, R, 2);
		const Vector e2 = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.001, 2}), 2).eigvals;
		const Vector e3 = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.001, 3}), 3).eigvals;
		ground = std::max(ground, std::abs(e2(0) - e3(0)));
		for (Index i = 1; i < 4; i++)
		{
			excited = std::max(excited, (e3.array() - e2(i)).abs().minCoeff());
		}
	}
	MESSAGE("largest shift of the ground polariton " << ground << ", of the next three " << excited);
	// the permanent dipoles reach |mu| ~ 10, so g mu sqrt(2) couples the added Fock level at the 1e-3 scale
	CHECK(ground < 1e-5);
	CHECK(excited < 1e-2);
}

TEST_CASE("adiabatic-Fock gradient is symmetric and vanishes in the photon block")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, 0.0, 2);
	AdiabaticSet t = s;
	t.dipole_grad = dipole_derivative(Electronic, Model, 0.0, 1e-4, s);
	const Matrix g = adiabatic_fock_gradient(t, CavityParams{0.1, 0.0, 2});
	CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-12);
	CHECK(g(0, 1) == 0.0);
	CHECK_THROWS_AS(adiabatic_fock_gradient(s, CavityParams{0.1, 0.0, 2}), ShapeError);
	CHECK_THROWS_AS(CavityParams({-0.1, 0.0, 2}).validate(), DomainError);
}
