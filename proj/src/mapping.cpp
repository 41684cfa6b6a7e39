/// @file mapping.cpp
/// @brief MMST propagation, samplers and window/spin estimators

#include "qdpol/mapping.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qdpol
{

double spin_lsc_gamma(Index n)
{
	const double nn = static_cast<double>(n);
	return 2.0 / nn * (std::sqrt(nn + 1.0) - 1.0);
}

void set_action_angle(MappingState& s, const Vector& eps, const Vector& theta)
{
	const Index n = eps.size();
	s.q.resize(n);
	s.p.resize(n);
	for (Index j = 0; j < n; j++)
	{
		const double r = std::sqrt(2.0 * eps(j));
		s.q(j) = r * std::cos(theta(j));
		s.p(j) = -r * std::sin(theta(j));
	}
}

static Vector random_angles(Index n, std::mt19937_64& rng)
{
	std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
	Vector th(n);
	for (Index j = 0; j < n; j++)
	{
		th(j) = u(rng);
	}
	return th;
}

MappingState sqc_sample_initial(Index i, Index n, std::mt19937_64& rng)
{
	if (i < 0 || i >= n)
	{
		throw DomainError("sqc_sample_initial: initial state out of range");
	}
	std::uniform_real_distribution<double> u(0.0, 1.0);
	// joint density proportional to the triangle window W_i; its eps_i marginal is 2 - eps on (1, 2)
	Vector eps(n);
	eps(i) = 2.0 - std::sqrt(1.0 - u(rng));
	const double top = 2.0 - eps(i);
	for (Index j = 0; j < n; j++)
	{
		if (j != i)
		{
			eps(j) = top * u(rng);
		}
	}
	MappingState s;
	s.method = MappingMethod::GammaSqc;
	set_action_angle(s, eps, random_angles(n, rng));
	s.gamma = eps;
	s.gamma(i) -= 1.0;
	return s;
}

MappingState spin_lsc_initial(Index i, Index n, std::mt19937_64& rng)
{
	if (i < 0 || i >= n)
	{
		throw DomainError("spin_lsc_initial: initial state out of range");
	}
	const double g = spin_lsc_gamma(n);
	Vector eps = Vector::Constant(n, 0.5 * g);
	eps(i) += 1.0;
	MappingState s;
	s.method = MappingMethod::SpinLsc;
	set_action_angle(s, eps, random_angles(n, rng));
	s.gamma = Vector::Constant(n, 0.5 * g);
	return s;
}

double mapping_energy(const MappingState& s, const Matrix& v)
{
	return 0.5 * (s.q.dot(v * s.q) + s.p.dot(v * s.p)) - v.diagonal().dot(s.gamma);
}

double mapping_force(const MappingState& s, const Matrix& g)
{
	return -0.5 * (s.q.dot(g * s.q) + s.p.dot(g * s.p)) + g.diagonal().dot(s.gamma);
}

/// exact flow of 1/2 sum_j V_jj (q_j^2 + p_j^2) for time h
static void rotate_diagonal(MappingState& s, const Vector& vd, double h)
{
	for (Index j = 0; j < s.size(); j++)
	{
		// long double keeps c^2 + s^2 = 1 below double rounding, so actions do not creep over many steps
		const long double a = static_cast<long double>(vd(j)) * h;
		const long double c = std::cos(a), sn = std::sin(a);
		const long double q = s.q(j), p = s.p(j);
		s.q(j) = static_cast<double>(q * c + p * sn);
		s.p(j) = static_cast<double>(p * c - q * sn);
	}
}

void mapping_substep(MappingState& s, const Matrix& v, double h)
{
	const Vector vd = v.diagonal();
	Matrix off = v;
	off.diagonal().setZero();
	rotate_diagonal(s, vd, 0.5 * h);
	s.p.noalias() -= 0.5 * h * (off * s.q);
	s.q.noalias() += h * (off * s.p);
	s.p.noalias() -= 0.5 * h * (off * s.q);
	rotate_diagonal(s, vd, 0.5 * h);
}

void propagate_mapping(MappingState& s, const QdStepData& step, double dt, Index n_sub)
{
	if (n_sub < 1)
	{
		throw DomainError("propagate_mapping: n_sub must be positive");
	}
	const double h = dt / static_cast<double>(n_sub);
	const Matrix dv = step.v1 - step.v0;
	for (Index k = 0; k < n_sub; k++)
	{
		const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(n_sub);
		mapping_substep(s, step.v0 + f * dv, h);
	}
}

double integrate_mapping_step(MappingState& s, double& P, const QdStepData& step, double dt, Index n_sub)
{
	propagate_mapping(s, step, dt, n_sub);
	const double f = mapping_force(s, step.grad_v1);
	if (!std::isfinite(f))
	{
		throw NumericalError("non-finite mapping force");
	}
	P += 0.5 * dt * f;
	s.q = transfer_vector(step.s_ortho, step.n_fock, s.q);
	s.p = transfer_vector(step.s_ortho, step.n_fock, s.p);
	return f;
}

Index sqc_bin(const Vector& eps)
{
	Index found = -1;
	for (Index j = 0; j < eps.size(); j++)
	{
		if (eps(j) >= 1.0)
		{
			if (found >= 0)
			{
				return -1;
			}
			found = j;
		}
	}
	return found;
}

Vector sqc_estimate(const std::vector<Vector>& actions)
{
	if (actions.empty())
	{
		return Vector();
	}
	Vector counts = Vector::Zero(actions.front().size());
	for (const Vector& e : actions)
	{
		const Index j = sqc_bin(e);
		if (j >= 0)
		{
			counts(j) += 1.0;
		}
	}
	const double total = counts.sum();
	if (total == 0.0)
	{
		return Vector::Constant(counts.size(), std::numeric_limits<double>::quiet_NaN());
	}
	return counts / total;
}

Vector spin_lsc_estimator(const MappingState& s)
{
	const double n = static_cast<double>(s.size());
	const double g = spin_lsc_gamma(s.size());
	const double den = 1.0 + 0.5 * n * g;
	const Vector r2 = (s.q.array().square() + s.p.array().square()).matrix();
	return ((n + 1.0) / (2.0 * den * den) * r2.array() - (1.0 - 0.5 * g) / den).matrix();
}

double spin_lsc_initial_factor(const MappingState& s, Index i)
{
	return 0.5 * (s.q(i) * s.q(i) + s.p(i) * s.p(i) - spin_lsc_gamma(s.size()));
}

Vector spin_lsc_estimate(const std::vector<MappingState>& states, const std::vector<double>& factors)
{
	if (states.empty() || states.size() != factors.size())
	{
		throw ShapeError("spin_lsc_estimate: ensemble and factors differ in size");
	}
	Vector acc = Vector::Zero(states.front().size());
	for (std::size_t k = 0; k < states.size(); k++)
	{
		acc += factors[k] * spin_lsc_estimator(states[k]);
	}
	return acc / static_cast<double>(states.size());
}

/// One output row for the trajectory's own method
static Vector mapping_row(const MappingState& s, double initial_factor)
{
	if (s.method == MappingMethod::GammaSqc)
	{
		Vector row = Vector::Zero(s.size());
		const Index j = sqc_bin(s.actions());
		if (j >= 0)
		{
			row(j) = 1.0;
		}
		return row;
	}
	return initial_factor * spin_lsc_estimator(s);
}

TrajectoryResult run_mapping_trajectory(
	const ElectronicSource& source,
	const CavityParams& cav,
	MappingState s,
	double R,
	double P,
	const TrajectoryOptions& opt)
{
	const Index n = source.n_states() * cav.n_fock;
	if (s.size() != n)
	{
		throw ShapeError("run_mapping_trajectory: mapping state does not match the basis");
	}
	const double factor = (s.method == MappingMethod::SpinLsc) ? spin_lsc_initial_factor(s, opt.initial_state) : 1.0;

	AdiabaticSet prev = source.at(R, nullptr);
	check_set_invariants(prev);
	double F = mapping_force(s, build_step(prev, prev, cav).grad_v1);

	TrajectoryResult res;
	res.estimators.assign(1, Matrix::Zero(opt.n_out(), n));
	res.estimators[0].row(0) = mapping_row(s, factor).transpose();
	const double e0 = 0.5 * P * P / opt.mass + mapping_energy(s, build_v_matrix(prev, cav));

	for (Index k = 1; k <= opt.n_steps; k++)
	{
		P += 0.5 * opt.dt * F;
		R += opt.dt * P / opt.mass;
		AdiabaticSet cur = source.at(R, &prev);
		if (k % 100 == 0)
		{
			check_set_invariants(cur);
		}
		const QdStepData step = build_step(prev, cur, cav, opt.lowdin);
		check_sign_continuity(step.s_raw);
		F = integrate_mapping_step(s, P, step, opt.dt, opt.n_sub);
		prev = std::move(cur);

		if (k % opt.out_every == 0)
		{
			res.estimators[0].row(k / opt.out_every) = mapping_row(s, factor).transpose();
			const double e = 0.5 * P * P / opt.mass + mapping_energy(s, build_v_matrix(prev, cav));
			res.max_energy_drift = std::max(res.max_energy_drift, std::abs(e - e0));
		}
	}
	return res;
}

} // namespace qdpol
