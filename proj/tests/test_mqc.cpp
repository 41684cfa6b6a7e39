/// @file test_mqc.cpp
/// @brief Ehrenfest and surface hopping: forces, hops, rescaling, initial states, estimators

#include "qdpol/mqc.hpp"

#include <doctest.h>

#include <cmath>

using namespace qdpol;

namespace
{

const DvrGrid Electronic{};
const SmParams Model{};

const TabulatedDvrSource& table()
{
	static const TabulatedDvrSource t(Electronic, Model, 2, -6.0, 4.0, 0.02);
	return t;
}

TrajectoryOptions options(double t_fs, Index n_sub, Index initial)
{
	TrajectoryOptions opt;
	opt.dt = 0.1;
	opt.n_sub = n_sub;
	opt.n_steps = std::lround(fs_to_au(t_fs) / opt.dt);
	opt.out_every = 41;
	opt.initial_state = initial;
	return opt;
}

} // namespace

TEST_CASE("single state: the Ehrenfest force is the adiabatic force")
{
	const DirectDvrSource src(Electronic, Model, 1);
	const AdiabaticSet s = src.at(-4.0, nullptr);
	const CavityParams cav{0.1, 0.0, 1};
	ComplexVector c(1);
	c(0) = 1.0;
	CHECK(ehrenfest_force(c, build_step(s, s, cav).grad_v1) == doctest::Approx(-s.hf_grad(0, 0)).epsilon(1e-14));
}

TEST_CASE("without coupling the photon sectors stay populated as they started")
{
	const CavityParams cav{0.1, 0.0, 2};
	const TrajectoryResult r = run_ehrenfest_qd(table(), cav, -4.0, 0.0, options(10.0, 10, 2));
	const Matrix& pop = r.estimators[0];
	for (Index t = 0; t < pop.rows(); t++)
	{
		CHECK(std::abs(pop(t, 0) + pop(t, 2) - 1.0) < 1e-8);
		CHECK(std::abs(pop(t, 1) + pop(t, 3)) < 1e-8);
	}
}

TEST_CASE("Ehrenfest norm and energy over 30 fs")
{
	const CavityParams cav{0.1, 0.005, 2};
	const TrajectoryResult r = run_ehrenfest_qd(table(), cav, -4.0, 0.3, options(30.0, 10, 2));
	const Matrix& pop = r.estimators[0];
	CHECK((pop.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
	MESSAGE("Ehrenfest energy drift " << r.max_energy_drift);
	CHECK(r.max_energy_drift < 1e-5);
}

TEST_CASE("QD and polariton-basis Ehrenfest agree along one trajectory")
{
	const CavityParams cav{0.1, 0.005, 2};
	const TrajectoryOptions opt = options(8.0, 10, 2);
	const TrajectoryResult a = run_ehrenfest_qd(table(), cav, -4.0, 0.3, opt);
	const TrajectoryResult b = run_ehrenfest_polariton(table(), cav, -4.0, 0.3, opt);
	const double diff = (a.estimators[0] - b.estimators[0]).cwiseAbs().maxCoeff();
	MESSAGE("largest population difference " << diff);
	CHECK(diff < 1e-4);
}

TEST_CASE("hop probabilities")
{
	Matrix nac(3, 3);
	nac << 0.0, 0.5, -0.2, -0.5, 0.0, 0.3, 0.2, -0.3, 0.0;
	ComplexVector pure = ComplexVector::Zero(3);
	pure(1) = 1.0;
	CHECK(hop_probabilities(pure, 1, nac, 0.01, 0.1).cwiseAbs().maxCoeff() == 0.0);

	ComplexVector c(3);
	c << Complex(0.6, 0.0), Complex(0.0, 0.0), Complex(0.8, 0.0);
	const double v = 0.01, dt = 0.1;
	const Vector f = hop_probabilities(c, 0, nac, v, dt);
	// f_j = -2 Re(rho_jk^* v d_jk) dt / rho_kk with rho_jk = c_j c_k^*
	const double raw = -2.0 * (0.8 * 0.6) * v * nac(2, 0) * dt / 0.36;
	CHECK(raw < 0.0);
	CHECK(f(2) == 0.0);
	const Vector g = hop_probabilities(c, 0, nac, -v, dt);
	CHECK(g(2) == doctest::Approx(-raw).epsilon(1e-14));
	CHECK(g(0) == 0.0);

	Vector probs(3);
	probs << 0.0, 0.2, 0.3;
	CHECK(select_hop(probs, 0, 0.1) == 1);
	CHECK(select_hop(probs, 0, 0.4) == 2);
	CHECK(select_hop(probs, 0, 0.6) == -1);
}

TEST_CASE("momentum rescaling conserves total energy or reports a frustrated hop")
{
	const double M = 1836.0;
	for (double d : {0.7, -1.3, 4.0})
	{
		double P = 5.0;
		const double e_from = 0.10, e_to = 0.102;
		const double before = 0.5 * P * P / M + e_from;
		REQUIRE(rescale_momentum(P, M, d, e_from, e_to));
		CHECK(std::abs(0.5 * P * P / M + e_to - before) < 1e-10);
		CHECK(P > 0.0);
	}
	double P = 0.5;
	CHECK_FALSE(rescale_momentum(P, M, 1.0, 0.1, 0.2));
	CHECK(P == 0.5);
	CHECK_FALSE(rescale_momentum(P, M, 0.0, 0.1, 0.09));
	double down = 0.5;
	REQUIRE(rescale_momentum(down, M, 1.0, 0.2, 0.1));
	CHECK(std::abs(0.5 * down * down / M + 0.1 - (0.5 * 0.25 / M + 0.2)) < 1e-12);
}

TEST_CASE("initial active state without coupling is the bare excited state")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, -4.0, 2);
	const PolaritonMatrices p = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.0, 2}), 2);
	std::mt19937_64 rng(1);
	for (int k = 0; k < 20; k++)
	{
		ComplexVector c;
		const Index a = fssh_initial_active(p, 2, rng, c);
		CHECK(std::abs(p.eigvecs(2, a)) == doctest::Approx(1.0).epsilon(1e-14));
		CHECK(std::abs(c.squaredNorm() - 1.0) < 1e-14);
	}
}

TEST_CASE("initial active state frequencies follow the projection weights")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, 0.9, 2);
	const PolaritonMatrices p = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.005, 2}), 2);
	const Vector w = p.eigvecs.row(2).transpose().array().square();
	CHECK(std::abs(w.sum() - 1.0) < 1e-10);
	MESSAGE("weights " << w.transpose());
	std::mt19937_64 rng(17);
	const int n = 100000;
	Vector counts = Vector::Zero(4);
	ComplexVector c;
	for (int k = 0; k < n; k++)
	{
		counts(fssh_initial_active(p, 2, rng, c)) += 1.0;
	}
	for (Index i = 0; i < 4; i++)
	{
		const double sigma = std::sqrt(n * w(i) * (1.0 - w(i)));
		CHECK(std::abs(counts(i) - n * w(i)) <= 3.0 * sigma + 1e-9);
	}
}

TEST_CASE("population estimators")
{
	const AdiabaticSet s = solve_adiabatic(Electronic, Model, 1.0, 2);
	const PolaritonMatrices p = polariton_eigen(build_v_matrix(s, CavityParams{0.1, 0.005, 2}), 2);
	std::mt19937_64 rng(3);
	ComplexVector c;
	const Index active = fssh_initial_active(p, 2, rng, c);
	const Vector m2 = fssh_populations(p.eigvecs, c, active, 2);
	CHECK((m2 - Vector::Unit(4, 2)).cwiseAbs().maxCoeff() < 1e-12);
	for (int m = 1; m <= 3; m++)
	{
		CHECK(std::abs(fssh_populations(p.eigvecs, c, active, m).sum() - 1.0) < 1e-10);
	}
	ComplexVector mixed(4);
	mixed << Complex(0.5, 0.1), Complex(-0.3, 0.2), Complex(0.4, -0.5), Complex(0.1, 0.4);
	mixed.normalize();
	const Vector m3 = fssh_populations(p.eigvecs, mixed, 1, 3);
	CHECK(std::abs(m3.sum() - 1.0) < 1e-10);

	const Vector m1 = fssh_populations(Matrix::Identity(4, 4), mixed, 3, 1);
	CHECK(m1 == Vector::Unit(4, 3));
	CHECK_THROWS_AS(fssh_populations(p.eigvecs, mixed, 1, 4), DomainError);
}

TEST_CASE("surface hopping trajectory conserves energy across hops")
{
	const CavityParams cav{0.1, 0.005, 2};
	std::mt19937_64 rng(5);
	Index hops = 0;
	for (int k = 0; k < 3; k++)
	{
		const TrajectoryResult r = run_fssh(table(), cav, -4.0, 0.3, options(30.0, 2, 2), rng);
		hops += r.hops;
		CHECK(r.max_energy_drift < 1e-5);
		for (const Matrix& e : r.estimators)
		{
			CHECK((e.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
		}
	}
	MESSAGE("hops in three trajectories " << hops);
}

TEST_CASE("polariton frame NAC from the gradient matrix")
{
	const DirectDvrSource src(Electronic, Model, 2);
	const CavityParams cav{0.1, 0.005, 2};
	const PolaritonFrame f = make_polariton_frame(src.at(1.0, nullptr), cav, nullptr);
	const Index n = f.pol.eigvals.size();
	CHECK((f.nac_pl + f.nac_pl.transpose()).cwiseAbs().maxCoeff() == 0.0);
	for (Index i = 0; i < n; i++)
	{
		for (Index j = 0; j < n; j++)
		{
			if (i != j)
			{
				CHECK(std::abs(f.nac_pl(i, j) * (f.pol.eigvals(j) - f.pol.eigvals(i)) - f.grad_pl(i, j)) < 1e-12);
			}
		}
	}
	// phases follow the previous frame
	const PolaritonFrame g = make_polariton_frame(src.at(1.01, &f.set), cav, &f);
	const Matrix s = kron(Matrix(state_overlap(f.set, g.set).transpose()), Matrix::Identity(2, 2));
	CHECK(((s * f.pol.eigvecs).transpose() * g.pol.eigvecs).diagonal().minCoeff() > 0.0);
}
