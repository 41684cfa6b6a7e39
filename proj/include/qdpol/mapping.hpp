/// @file mapping.hpp
/// @brief MMST mapping dynamics with gamma-SQC and spin-LSC estimators

#pragma once

#include "dynamics.hpp"

#include <random>

namespace qdpol
{

enum class MappingMethod
{
	GammaSqc,
	SpinLsc,
};

struct MappingState
{
	Vector q;
	Vector p;
	/// zero-point parameters; component j stays attached to label j across hand-offs
	Vector gamma;
	MappingMethod method = MappingMethod::SpinLsc;

	Index size() const { return q.size(); }
	/// epsilon_j = (q_j^2 + p_j^2) / 2
	Vector actions() const { return 0.5 * (q.array().square() + p.array().square()).matrix(); }
};

/// Gamma = (2/N)(sqrt(N+1) - 1)
double spin_lsc_gamma(Index n_states);

/// q = sqrt(2 eps) cos(theta), p = -sqrt(2 eps) sin(theta)
void set_action_angle(MappingState& s, const Vector& eps, const Vector& theta);

/// Triangle-window sample for initial state i, with gamma_j = eps_j - delta_ij
MappingState sqc_sample_initial(Index i, Index n_states, std::mt19937_64& rng);

/// Focused sample: eps_i = 1 + Gamma/2, eps_j = Gamma/2, random angles
MappingState spin_lsc_initial(Index i, Index n_states, std::mt19937_64& rng);

/// Electronic part of the mapping Hamiltonian, 1/2 sum V_ij (q_i q_j + p_i p_j) - sum V_jj gamma_j
double mapping_energy(const MappingState& s, const Matrix& v);

/// F = -1/2 sum G_ij (p_i p_j + q_i q_j) + sum G_jj gamma_j
double mapping_force(const MappingState& s, const Matrix& grad_v);

/// One electronic sub-step of length h under a constant V: exact diagonal rotations around
/// a symplectic leapfrog on the off-diagonal part
void mapping_substep(MappingState& s, const Matrix& v, double h);

/// Electronic propagation across one QD step with V interpolated at sub-step midpoints
void propagate_mapping(MappingState& s, const QdStepData& step, double dt, Index n_sub);

/// Second half of a nuclear step, after the drift to the step's end geometry:
/// mapping variables over dt, new force from grad_v1, closing half kick, hand-off to the new basis.
/// @return the force at the end of the step
double integrate_mapping_step(MappingState& s, double& P, const QdStepData& step, double dt, Index n_sub);

/// Triangle-window bin: state j iff eps_j >= 1 and every other eps < 1; -1 otherwise
Index sqc_bin(const Vector& actions);

/// Normalized window populations of an ensemble of action vectors; NaN row if nothing is binned
Vector sqc_estimate(const std::vector<Vector>& actions);

/// [|j><j|]_sbar for every j
Vector spin_lsc_estimator(const MappingState& s);

/// [|i><i|]_s = (q_i^2 + p_i^2 - Gamma)/2
double spin_lsc_initial_factor(const MappingState& s, Index i);

/// Ensemble mean of the product estimator
Vector spin_lsc_estimate(const std::vector<MappingState>& states, const std::vector<double>& initial_factors);

/// Full trajectory. Estimator 0 holds SQC bin indicators or spin-LSC weighted populations.
TrajectoryResult run_mapping_trajectory(
	const ElectronicSource& source,
	const CavityParams& cav,
	MappingState s,
	double R,
	double P,
	const TrajectoryOptions& opt);

} // namespace qdpol
