/// @file mqc.hpp
/// @brief Ehrenfest and fewest-switches surface hopping

#pragma once

#include "dynamics.hpp"

#include <random>

namespace qdpol
{

/// Polariton eigendata at one geometry plus the gradient chain in the polariton basis
struct PolaritonFrame
{
	AdiabaticSet set;
	PolaritonMatrices pol;
	/// <E_I| dV/dR |E_J>
	Matrix grad_pl;
	/// <E_I| d/dR E_J>
	Matrix nac_pl;
};

/// Builds the frame at set's geometry. With prev, polariton phases follow prev through the
/// overlap U_prev^T (S (x) I) U.
PolaritonFrame make_polariton_frame(AdiabaticSet set, const CavityParams& cav, const PolaritonFrame* prev, double degeneracy_tol = 1e-10);

/// One RK4 step of i dc/dt = V c with V linear in time between v0 (s = 0) and v1 (s = 1)
void rk4_linear_v(ComplexVector& c, const Matrix& v0, const Matrix& v1, double s0, double s1, double dt_total, double h);

/// Electronic propagation of an Ehrenfest amplitude vector over one QD step
void ehrenfest_propagate(ComplexVector& c, const QdStepData& step, double dt, Index n_sub);

/// -Re(c^dagger G c)
double ehrenfest_force(const ComplexVector& c, const Matrix& grad);

/// Second half of an Ehrenfest QD step: amplitudes across the step, force from grad_v1, closing
/// half kick, hand-off. Throws NumericalError if the norm moves by more than 1e-6.
double ehrenfest_step(ComplexVector& c, double& P, const QdStepData& step, double dt, Index n_sub);

/// Moving-basis propagation in the polariton basis: dc/dt = -i E c - v D c, with E and D linear in time
void polariton_propagate(ComplexVector& c, const PolaritonFrame& f0, const PolaritonFrame& f1, double velocity, double dt, Index n_sub);

struct SurfaceHopState
{
	Index active = 0;
	double last_hop_time = -1.0;
	Index frustrated_count = 0;
	Index hop_count = 0;
};

/// Fewest-switches probabilities out of the active state over dt; negative fluxes set to zero
Vector hop_probabilities(const ComplexVector& c, Index active, const Matrix& nac_pl, double velocity, double dt);

/// Picks the target from cumulative probabilities and zeta; -1 for no hop
Index select_hop(const Vector& probs, Index active, double zeta);

/// Solves for the momentum change along the 1-D coupling direction that conserves
/// P^2/2M + E_active. @return false (momentum untouched) for a frustrated hop
bool rescale_momentum(double& P, double mass, double direction, double e_from, double e_to);

/// Initial active state drawn from |<E_I|psi_0>|^2; amplitudes set to <E_I|psi_0>
Index fssh_initial_active(const PolaritonMatrices& pol, Index initial_af, std::mt19937_64& rng, ComplexVector& c);

/// Adiabatic-Fock populations for estimator 1, 2 or 3 from polariton amplitudes
Vector fssh_populations(const Matrix& U, const ComplexVector& c, Index active, int method);

/// Ehrenfest through QD matrices; estimator 0 holds |c_i|^2
TrajectoryResult run_ehrenfest_qd(const ElectronicSource& source, const CavityParams& cav, double R, double P, const TrajectoryOptions& opt);

/// Ehrenfest in the polariton basis with the moving-basis coupling; estimator 0 holds |(U c)_i|^2
TrajectoryResult run_ehrenfest_polariton(const ElectronicSource& source, const CavityParams& cav, double R, double P, const TrajectoryOptions& opt);

/// FSSH; estimators 0, 1, 2 are methods 1, 2 and 3
TrajectoryResult run_fssh(
	const ElectronicSource& source,
	const CavityParams& cav,
	double R,
	double P,
	const TrajectoryOptions& opt,
	std::mt19937_64& rng,
	bool reverse_on_frustration = false);

} // namespace qdpol
