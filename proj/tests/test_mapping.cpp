/// @file test_mapping.cpp
/// @brief Mapping samplers, estimators, sub-step integrator and trajectory conservation

#include "qdpol/mapping.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace qdpol;

namespace
{

const DvrGrid Electronic{};
const SmParams Model{};

Matrix test_potential()
{
	Matrix v(3, 3);
	v << 0.10, 0.02, -0.01, 0.02, 0.15, 0.03, -0.01, 0.03, 0.22;
	return v;
}

MappingState random_state(Index n, std::mt19937_64& rng)
{
	std::normal_distribution<double> n01;
	MappingState s;
	s.q.resize(n);
	s.p.resize(n);
	for (Index j = 0; j < n; j++)
	{
		s.q(j) = n01(rng);
		s.p(j) = n01(rng);
	}
	s.gamma = Vector::Constant(n, 1.0 / 3.0);
	return s;
}

} // namespace

TEST_CASE("spin-mapping zero-point parameter")
{
	CHECK(spin_lsc_gamma(2) == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-15));
	CHECK(spin_lsc_gamma(4) == doctest::Approx(0.5 * (std::sqrt(5.0) - 1.0)).epsilon(1e-15));
}

TEST_CASE("focused spin-mapping samples")
{
	std::mt19937_64 rng(11);
	for (Index n : {2, 4, 16})
	{
		const double g = spin_lsc_gamma(n);
		for (int k = 0; k < 100; k++)
		{
			const Index i = k % n;
			const MappingState s = spin_lsc_initial(i, n, rng);
			const Vector r2 = (s.q.array().square() + s.p.array().square()).matrix();
			for (Index j = 0; j < n; j++)
			{
				CHECK(std::abs(0.5 * (r2(j) - g) - (j == i ? 1.0 : 0.0)) < 1e-12);
			}
			CHECK(std::abs(spin_lsc_initial_factor(s, i) - 1.0) < 1e-12);
			const Vector pop = spin_lsc_estimator(s);
			for (Index j = 0; j < n; j++)
			{
				CHECK(std::abs(pop(j) - (j == i ? 1.0 : 0.0)) < 1e-12);
			}
		}
	}
	CHECK_THROWS_AS(spin_lsc_initial(2, 2, rng), DomainError);
}

TEST_CASE("triangle-window samples respect the window and the gamma algebra")
{
	std::mt19937_64 rng(5);
	for (int k = 0; k < 10000; k++)
	{
		const MappingState s = sqc_sample_initial(0, 2, rng);
		const Vector eps = s.actions();
		CHECK(eps(0) > 1.0);
		CHECK(eps(0) < 2.0);
		CHECK(eps(1) >= 0.0);
		CHECK(eps(1) < 2.0 - eps(0) + 1e-12);
		CHECK(std::abs(eps(0) - s.gamma(0) - 1.0) < 1e-12);
		CHECK(std::abs(eps(1) - s.gamma(1)) < 1e-12);
		CHECK(sqc_bin(eps) == 0);
	}
	CHECK_THROWS_AS(sqc_sample_initial(3, 2, rng), DomainError);
}

TEST_CASE("gamma from a given action vector")
{
	// eps = (1.3, 0.4) with state 1 occupied gives gamma = (0.3, 0.4) and eps - gamma = (1, 0)
	Vector eps(2);
	eps << 1.3, 0.4;
	MappingState s;
	set_action_angle(s, eps, Vector::Zero(2));
	s.gamma = eps;
	s.gamma(0) -= 1.0;
	CHECK(s.gamma(0) == doctest::Approx(0.3).epsilon(1e-15));
	CHECK(s.gamma(1) == doctest::Approx(0.4).epsilon(1e-15));
	CHECK((s.actions() - s.gamma - Vector::Unit(2, 0)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("mean occupied action of the uniformly sampled triangle window")
{
	// uniform sampling inside W_i gives the eps_i marginal 2 - eps on (1, 2), whose mean is 4/3
	std::mt19937_64 rng(9);
	const int n = 100000;
	double sum = 0.0;
	for (int k = 0; k < n; k++)
	{
		sum += sqc_sample_initial(1, 2, rng).actions()(1);
	}
	const double mean = sum / n;
	MESSAGE("mean occupied action " << mean);
	CHECK(std::abs(mean - 4.0 / 3.0) < 0.01);
}

TEST_CASE("triangle-window binning")
{
	Vector a(2), b(2), c(3);
	a << 1.5, 0.2;
	b << 0.9, 0.8;
	c << 1.1, 1.2, 0.0;
	CHECK(sqc_bin(a) == 0);
	CHECK(sqc_bin(b) == -1);
	CHECK(sqc_bin(c) == -1);

	const Vector p = sqc_estimate({a, b, a, Vector::Unit(2, 1) * 1.7});
	CHECK(p(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
	CHECK(p.sum() == 1.0);
	const Vector none = sqc_estimate({b});
	CHECK(std::isnan(none(0)));
}

TEST_CASE("spin-mapping estimator sums to one on the sampling sphere")
{
	std::mt19937_64 rng(21);
	for (Index n : {2, 3, 8})
	{
		const double radius2 = 2.0 + n * spin_lsc_gamma(n);
		for (int k = 0; k < 50; k++)
		{
			MappingState s = random_state(n, rng);
			const double scale = std::sqrt(radius2 / (s.q.squaredNorm() + s.p.squaredNorm()));
			s.q *= scale;
			s.p *= scale;
			CHECK(std::abs(spin_lsc_estimator(s).sum() - 1.0) < 1e-12);
		}
	}
	// off the sphere the sum moves with the radius
	MappingState off = random_state(2, rng);
	off.q *= 3.0;
	CHECK(std::abs(spin_lsc_estimator(off).sum() - 1.0) > 1e-3);
}

TEST_CASE("spin-mapping estimator at a hand-evaluated point")
{
	const double g = std::sqrt(3.0) - 1.0;
	MappingState s;
	s.q = Vector(2);
	s.p = Vector(2);
	s.q << std::sqrt(2.0 + g), 0.0;
	s.p << 0.0, std::sqrt(g);
	// (N + 1)/(2(1 + N G/2)^2) r^2 - (1 - G/2)/(1 + N G/2) with N = 2, 1 + G = sqrt(3)
	const double e1 = 0.5 * (2.0 + g) - (1.0 - 0.5 * g) / std::sqrt(3.0);
	const double e2 = 0.5 * g - (1.0 - 0.5 * g) / std::sqrt(3.0);
	const Vector pop = spin_lsc_estimator(s);
	CHECK(pop(0) == doctest::Approx(e1).epsilon(1e-14));
	CHECK(pop(1) == doctest::Approx(e2).epsilon(1e-14));
	CHECK(std::abs(pop(0) - 1.0) < 1e-14);
	CHECK(std::abs(pop(1)) < 1e-14);

	const Vector mean = spin_lsc_estimate({s, s}, {1.0, 0.5});
	CHECK(mean(0) == doctest::Approx(0.75 * pop(0)).epsilon(1e-14));
	CHECK_THROWS_AS(spin_lsc_estimate({s}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("diagonal potential is a pure phase rotation")
{
	std::mt19937_64 rng(2);
	MappingState s = sqc_sample_initial(1, 3, rng);
	const Vector eps0 = s.actions();
	Matrix v = Matrix::Zero(3, 3);
	v.diagonal() << 0.1, 0.25, 0.4;
	for (int k = 0; k < 10000; k++)
	{
		mapping_substep(s, v, 0.05);
	}
	CHECK((s.actions() - eps0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sub-step integrator is second order")
{
	std::mt19937_64 rng(4);
	const MappingState s0 = random_state(3, rng);
	const Matrix v = test_potential();
	const double e0 = mapping_energy(s0, v);
	auto max_error = [&](double h)
	{
		MappingState s = s0;
		double worst = 0.0;
		const int steps = static_cast<int>(std::lround(200.0 / h));
		for (int k = 0; k < steps; k++)
		{
			mapping_substep(s, v, h);
			worst = std::max(worst, std::abs(mapping_energy(s, v) - e0));
		}
		return worst;
	};
	const double a = max_error(0.4);
	const double b = max_error(0.2);
	MESSAGE("energy error ratio under halving " << a / b);
	CHECK(std::abs(a / b - 4.0) < 0.6);
}

TEST_CASE("hand-off preserves the mapping radius")
{
	const double th = 0.3;
	Matrix s_el(2, 2);
	s_el << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
	std::mt19937_64 rng(8);
	const MappingState s = random_state(6, rng);
	const Vector q = transfer_vector(s_el, 3, s.q);
	const Vector p = transfer_vector(s_el, 3, s.p);
	CHECK(std::abs(q.squaredNorm() + p.squaredNorm() - s.q.squaredNorm() - s.p.squaredNorm()) < 1e-12);
}

TEST_CASE("gamma-corrected initial force keeps only the occupied diagonal element")
{
	std::mt19937_64 rng(12);
	Matrix g = test_potential();
	Matrix diag_only = Matrix::Zero(3, 3);
	diag_only.diagonal() = g.diagonal();
	for (int k = 0; k < 100; k++)
	{
		const Index i = k % 3;
		const MappingState s = sqc_sample_initial(i, 3, rng);
		CHECK(std::abs(mapping_force(s, diag_only) + g(i, i)) < 1e-14);
		double cross = 0.0;
		for (Index a = 0; a < 3; a++)
		{
			for (Index b = 0; b < 3; b++)
			{
				if (a != b)
				{
					cross += g(a, b) * (s.q(a) * s.q(b) + s.p(a) * s.p(b));
				}
			}
		}
		CHECK(std::abs(mapping_force(s, g) - (-g(i, i) - 0.5 * cross)) < 1e-14);
	}
}

TEST_CASE("samplers are deterministic in the seed")
{
	std::mt19937_64 a(99), b(99);
	const MappingState x = sqc_sample_initial(2, 4, a);
	const MappingState y = sqc_sample_initial(2, 4, b);
	CHECK(x.q == y.q);
	CHECK(x.p == y.p);
	CHECK(x.gamma == y.gamma);
}

TEST_CASE("trajectory energy conservation on the cavity model")
{
	const TabulatedDvrSource table(Electronic, Model, 2, -6.0, 4.0, 0.02);
	const CavityParams cav{0.1, 0.005, 2};
	auto run = [&](MappingState s, double dt_fs, Index n_sub)
	{
		TrajectoryOptions opt;
		opt.dt = fs_to_au(dt_fs);
		opt.n_sub = n_sub;
		opt.n_steps = std::lround(30.0 / dt_fs);
		opt.out_every = 1;
		opt.initial_state = 2;
		return run_mapping_trajectory(table, cav, std::move(s), -4.0, 0.3, opt);
	};
	std::mt19937_64 rng(31);
	const MappingState spin = spin_lsc_initial(2, 4, rng);
	const TrajectoryResult coarse = run(spin, 0.1, 100);
	const TrajectoryResult fine = run(spin, 0.05, 50);
	MESSAGE("spin-mapping energy drift: dt = 0.1 fs " << coarse.max_energy_drift << ", dt = 0.05 fs " << fine.max_energy_drift);
	CHECK(coarse.max_energy_drift < 1e-5);
	CHECK(coarse.max_energy_drift / fine.max_energy_drift > 3.0);
	// the off-diagonal leapfrog conserves a shadow of the mapping radius, so the sum wanders at O(h^2)
	CHECK((coarse.estimators[0].rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-6);

	const MappingState sqc = sqc_sample_initial(2, 4, rng);
	const TrajectoryResult w = run(sqc, 0.1, 100);
	const TrajectoryResult w2 = run(sqc, 0.05, 50);
	// per-trajectory gamma stays attached to its label across hand-offs and is not rotated with q, p
	MESSAGE("gamma-SQC energy drift: dt = 0.1 fs " << w.max_energy_drift << ", dt = 0.05 fs " << w2.max_energy_drift);
	CHECK(w.max_energy_drift < 1e-2);
}
