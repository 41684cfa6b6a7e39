/// @file mqc.cpp
/// @brief Ehrenfest (QD and polariton basis) and FSSH trajectories

#include "qdpol/mqc.hpp"

#include <cmath>
#include <string>

namespace qdpol
{

static constexpr Complex I1{0.0, 1.0};

/// Classic RK4 for dc/dt = f(s, c) over [s0, s0 + h]; f writes its result into the third argument
struct Rk4
{
	ComplexVector k1, k2, k3, k4, x;
	/// scratch for the right-hand side
	ComplexMatrix m;

	explicit Rk4(Index n) : k1(n), k2(n), k3(n), k4(n), x(n), m(n, n) {}

	template <typename F>
	void step(ComplexVector& c, double s0, double h, F&& f)
	{
		f(s0, c, k1);
		x = c + (0.5 * h) * k1;
		f(s0 + 0.5 * h, x, k2);
		x = c + (0.5 * h) * k2;
		f(s0 + 0.5 * h, x, k3);
		x = c + h * k3;
		f(s0 + h, x, k4);
		c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
	}
};

/// out = -i (a + s b) x
static void linear_rhs(const ComplexMatrix& a, const ComplexMatrix& b, double s, const ComplexVector& x, ComplexVector& out, ComplexMatrix& m)
{
	m = -I1 * (a + s * b);
	out.noalias() = m * x;
}

void rk4_linear_v(ComplexVector& c, const Matrix& v0, const Matrix& v1, double s0, double s1, double dt_total, double h)
{
	const ComplexMatrix a = v0.cast<Complex>();
	const ComplexMatrix b = (v1 - v0).cast<Complex>();
	Rk4 w(c.size());
	w.step(c, s0 * dt_total, h, [&](double t, const ComplexVector& x, ComplexVector& out) {
		linear_rhs(a, b, t / dt_total, x, out, w.m);
	});
	(void)s1;
}

void ehrenfest_propagate(ComplexVector& c, const QdStepData& step, double dt, Index n_sub)
{
	if (n_sub < 1)
	{
		throw DomainError("ehrenfest_propagate: n_sub must be positive");
	}
	const double h = dt / static_cast<double>(n_sub);
	const ComplexMatrix a = step.v0.cast<Complex>();
	const ComplexMatrix b = (step.v1 - step.v0).cast<Complex>();
	Rk4 w(c.size());
	const auto f = [&](double t, const ComplexVector& x, ComplexVector& out) { linear_rhs(a, b, t / dt, x, out, w.m); };
	for (Index k = 0; k < n_sub; k++)
	{
		w.step(c, static_cast<double>(k) * h, h, f);
	}
}

double ehrenfest_force(const ComplexVector& c, const Matrix& grad)
{
	return -(c.adjoint() * grad.cast<Complex>() * c)(0, 0).real();
}

static void check_norm(double before, double after)
{
	if (!(std::abs(after - before) <= 1e-6))
	{
		throw NumericalError("amplitude norm drifted by " + std::to_string(after - before) + " in one step");
	}
}

double ehrenfest_step(ComplexVector& c, double& P, const QdStepData& step, double dt, Index n_sub)
{
	const double n0 = c.squaredNorm();
	ehrenfest_propagate(c, step, dt, n_sub);
	check_norm(n0, c.squaredNorm());
	const double f = ehrenfest_force(c, step.grad_v1);
	if (!std::isfinite(f))
	{
		throw NumericalError("non-finite Ehrenfest force");
	}
	P += 0.5 * dt * f;
	c = transfer_vector(step.s_ortho, step.n_fock, c);
	return f;
}

PolaritonFrame make_polariton_frame(AdiabaticSet set, const CavityParams& cav, const PolaritonFrame* prev, double tol)
{
	PolaritonFrame fr;
	const Matrix v = build_v_matrix(set, cav);
	const Matrix g = adiabatic_fock_gradient(set, cav);
	if (prev != nullptr)
	{
		const Matrix s_el = state_overlap(prev->set, set);
		const Matrix ref = kron(Matrix(s_el.transpose()), Matrix::Identity(cav.n_fock, cav.n_fock)) * prev->pol.eigvecs;
		fr.pol = polariton_eigen(v, cav.n_fock, &ref);
	}
	else
	{
		fr.pol = polariton_eigen(v, cav.n_fock, nullptr);
	}
	fr.set = std::move(set);
	const Matrix& u = fr.pol.eigvecs;
	fr.grad_pl = u.transpose() * g * u;
	fr.grad_pl = 0.5 * (fr.grad_pl + fr.grad_pl.transpose()).eval();
	const Index n = u.cols();
	fr.nac_pl = Matrix::Zero(n, n);
	for (Index i = 0; i < n; i++)
	{
		for (Index j = i + 1; j < n; j++)
		{
			const double gap = fr.pol.eigvals(j) - fr.pol.eigvals(i);
			if (!(std::abs(gap) >= tol))
			{
				throw DegeneracyError("polariton states " + std::to_string(i) + ", " + std::to_string(j) + " degenerate");
			}
			fr.nac_pl(i, j) = fr.grad_pl(i, j) / gap;
			fr.nac_pl(j, i) = -fr.nac_pl(i, j);
		}
	}
	return fr;
}

void polariton_propagate(ComplexVector& c, const PolaritonFrame& f0, const PolaritonFrame& f1, double velocity, double dt, Index n_sub)
{
	if (n_sub < 1)
	{
		throw DomainError("polariton_propagate: n_sub must be positive");
	}
	const double h = dt / static_cast<double>(n_sub);
	const ComplexVector e0 = f0.pol.eigvals.cast<Complex>();
	const ComplexVector de = (f1.pol.eigvals - f0.pol.eigvals).cast<Complex>();
	const ComplexMatrix d0 = (velocity * f0.nac_pl).cast<Complex>();
	const ComplexMatrix dd = (velocity * (f1.nac_pl - f0.nac_pl)).cast<Complex>();
	Rk4 w(c.size());
	const auto f = [&](double t, const ComplexVector& x, ComplexVector& out) {
		const double s = t / dt;
		w.m = -(d0 + s * dd);
		w.m.diagonal() -= I1 * (e0 + s * de);
		out.noalias() = w.m * x;
	};
	for (Index k = 0; k < n_sub; k++)
	{
		w.step(c, static_cast<double>(k) * h, h, f);
	}
}

Vector hop_probabilities(const ComplexVector& c, Index active, const Matrix& nac_pl, double velocity, double dt)
{
	const Index n = c.size();
	Vector f = Vector::Zero(n);
	const double rho_kk = std::norm(c(active));
	if (rho_kk <= 0.0)
	{
		return f;
	}
	for (Index j = 0; j < n; j++)
	{
		if (j == active)
		{
			continue;
		}
		// rho_jk = c_j c_k^*
		const Complex rho_jk = c(j) * std::conj(c(active));
		const double v = -2.0 * (std::conj(rho_jk) * velocity * nac_pl(j, active)).real() * dt / rho_kk;
		f(j) = std::max(0.0, v);
	}
	return f;
}

Index select_hop(const Vector& probs, Index active, double zeta)
{
	double cum = 0.0;
	for (Index j = 0; j < probs.size(); j++)
	{
		if (j == active)
		{
			continue;
		}
		cum += probs(j);
		if (zeta < cum)
		{
			return j;
		}
	}
	return -1;
}

bool rescale_momentum(double& P, double mass, double d, double e_from, double e_to)
{
	const double a = d * d / (2.0 * mass);
	const double b = P * d / mass;
	const double c0 = e_to - e_from;
	if (a == 0.0)
	{
		return false;
	}
	const double disc = b * b - 4.0 * a * c0;
	if (disc < 0.0)
	{
		return false;
	}
	const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
	double alpha;
	if (q == 0.0)
	{
		alpha = 0.0;
	}
	else
	{
		const double r1 = q / a, r2 = c0 / q;
		alpha = (std::abs(r1) < std::abs(r2)) ? r1 : r2;
	}
	P += alpha * d;
	return true;
}

Index fssh_initial_active(const PolaritonMatrices& pol, Index initial_af, std::mt19937_64& rng, ComplexVector& c)
{
	const Vector amp = pol.eigvecs.row(initial_af).transpose();
	const double total = amp.squaredNorm();
	if (std::abs(total - 1.0) > 1e-8)
	{
		throw NumericalError("initial-state weights sum to " + std::to_string(total));
	}
	c = amp.cast<Complex>();
	std::uniform_real_distribution<double> u(0.0, 1.0);
	const double zeta = u(rng);
	double cum = 0.0;
	for (Index i = 0; i < amp.size(); i++)
	{
		cum += amp(i) * amp(i);
		if (zeta < cum)
		{
			return i;
		}
	}
	// zeta fell into the rounding gap at the top; take the last state with weight
	for (Index i = amp.size() - 1; i >= 0; i--)
	{
		if (amp(i) != 0.0)
		{
			return i;
		}
	}
	return 0;
}

Vector fssh_populations(const Matrix& U, const ComplexVector& c, Index active, int method)
{
	const Vector uk2 = U.col(active).array().square();
	const ComplexVector psi = U.cast<Complex>() * c;
	const Vector coh = psi.cwiseAbs2();
	switch (method)
	{
	case 1:
		return uk2;
	case 2:
		return coh;
	case 3:
		return uk2 + coh - U.array().square().matrix() * c.cwiseAbs2();
	default:
		throw DomainError("fssh_populations: method must be 1, 2 or 3");
	}
}

static void check_options(const ElectronicSource& source, const CavityParams& cav, const TrajectoryOptions& opt)
{
	const Index n = source.n_states() * cav.n_fock;
	if (opt.initial_state < 0 || opt.initial_state >= n || opt.out_every < 1 || opt.n_steps < 0 || !(opt.dt > 0))
	{
		throw DomainError("trajectory options out of range");
	}
}

TrajectoryResult run_ehrenfest_qd(const ElectronicSource& source, const CavityParams& cav, double R, double P, const TrajectoryOptions& opt)
{
	check_options(source, cav, opt);
	const Index n = source.n_states() * cav.n_fock;
	ComplexVector c = ComplexVector::Zero(n);
	c(opt.initial_state) = 1.0;

	AdiabaticSet prev = source.at(R, nullptr);
	check_set_invariants(prev);
	double F = ehrenfest_force(c, build_step(prev, prev, cav).grad_v1);
	const auto energy = [&]() {
		return 0.5 * P * P / opt.mass + (c.adjoint() * build_v_matrix(prev, cav).cast<Complex>() * c)(0, 0).real();
	};
	const double e0 = energy();

	TrajectoryResult res;
	res.estimators.assign(1, Matrix::Zero(opt.n_out(), n));
	res.estimators[0].row(0) = c.cwiseAbs2().transpose();
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
		F = ehrenfest_step(c, P, step, opt.dt, opt.n_sub);
		prev = std::move(cur);
		if (k % opt.out_every == 0)
		{
			res.estimators[0].row(k / opt.out_every) = c.cwiseAbs2().transpose();
			res.max_energy_drift = std::max(res.max_energy_drift, std::abs(energy() - e0));
		}
	}
	return res;
}

TrajectoryResult run_ehrenfest_polariton(const ElectronicSource& source, const CavityParams& cav, double R, double P, const TrajectoryOptions& opt)
{
	check_options(source, cav, opt);
	const Index n = source.n_states() * cav.n_fock;
	PolaritonFrame fr = make_polariton_frame(source.at(R, nullptr), cav, nullptr);
	ComplexVector c = fr.pol.eigvecs.row(opt.initial_state).transpose().cast<Complex>();
	const auto force = [&]() { return ehrenfest_force(c, fr.grad_pl); };
	const auto energy = [&]() { return 0.5 * P * P / opt.mass + c.cwiseAbs2().dot(fr.pol.eigvals); };
	double F = force();
	const double e0 = energy();

	TrajectoryResult res;
	res.estimators.assign(1, Matrix::Zero(opt.n_out(), n));
	res.estimators[0].row(0) = (fr.pol.eigvecs.cast<Complex>() * c).cwiseAbs2().transpose();
	for (Index k = 1; k <= opt.n_steps; k++)
	{
		P += 0.5 * opt.dt * F;
		const double v = P / opt.mass;
		R += opt.dt * v;
		PolaritonFrame next = make_polariton_frame(source.at(R, &fr.set), cav, &fr);
		check_sign_continuity(state_overlap(fr.set, next.set));
		const double n0 = c.squaredNorm();
		polariton_propagate(c, fr, next, v, opt.dt, opt.n_sub);
		check_norm(n0, c.squaredNorm());
		fr = std::move(next);
		F = force();
		P += 0.5 * opt.dt * F;
		if (k % opt.out_every == 0)
		{
			res.estimators[0].row(k / opt.out_every) = (fr.pol.eigvecs.cast<Complex>() * c).cwiseAbs2().transpose();
			res.max_energy_drift = std::max(res.max_energy_drift, std::abs(energy() - e0));
		}
	}
	return res;
}

TrajectoryResult run_fssh(
	const ElectronicSource& source,
	const CavityParams& cav,
	double R,
	double P,
	const TrajectoryOptions& opt,
	std::mt19937_64& rng,
	bool reverse_on_frustration)
{
	check_options(source, cav, opt);
	const Index n = source.n_states() * cav.n_fock;
	PolaritonFrame fr = make_polariton_frame(source.at(R, nullptr), cav, nullptr);
	ComplexVector c;
	SurfaceHopState hs;
	hs.active = fssh_initial_active(fr.pol, opt.initial_state, rng, c);
	std::uniform_real_distribution<double> u(0.0, 1.0);

	const auto energy = [&]() { return 0.5 * P * P / opt.mass + fr.pol.eigvals(hs.active); };
	double F = -fr.grad_pl(hs.active, hs.active);
	const double e0 = energy();

	TrajectoryResult res;
	res.estimators.assign(3, Matrix::Zero(opt.n_out(), n));
	const auto record = [&](Index row) {
		for (int m = 0; m < 3; m++)
		{
			res.estimators[static_cast<std::size_t>(m)].row(row) = fssh_populations(fr.pol.eigvecs, c, hs.active, m + 1).transpose();
		}
	};
	record(0);
	for (Index k = 1; k <= opt.n_steps; k++)
	{
		P += 0.5 * opt.dt * F;
		const double v = P / opt.mass;
		R += opt.dt * v;
		PolaritonFrame next = make_polariton_frame(source.at(R, &fr.set), cav, &fr);
		check_sign_continuity(state_overlap(fr.set, next.set));
		const double n0 = c.squaredNorm();
		polariton_propagate(c, fr, next, v, opt.dt, opt.n_sub);
		check_norm(n0, c.squaredNorm());
		fr = std::move(next);
		F = -fr.grad_pl(hs.active, hs.active);
		P += 0.5 * opt.dt * F;

		const Vector probs = hop_probabilities(c, hs.active, fr.nac_pl, P / opt.mass, opt.dt);
		const double zeta = u(rng);
		const Index target = select_hop(probs, hs.active, zeta);
		if (target >= 0)
		{
			if (rescale_momentum(P, opt.mass, fr.nac_pl(hs.active, target), fr.pol.eigvals(hs.active), fr.pol.eigvals(target)))
			{
				hs.active = target;
				hs.last_hop_time = static_cast<double>(k) * opt.dt;
				hs.hop_count++;
				F = -fr.grad_pl(hs.active, hs.active);
			}
			else
			{
				hs.frustrated_count++;
				if (reverse_on_frustration)
				{
					P = -P;
				}
			}
		}
		if (k % opt.out_every == 0)
		{
			record(k / opt.out_every);
			res.max_energy_drift = std::max(res.max_energy_drift, std::abs(energy() - e0));
		}
	}
	res.hops = hs.hop_count;
	res.frustrated = hs.frustrated_count;
	return res;
}

} // namespace qdpol
