/// @file dynamics.hpp
/// @brief Types shared by the trajectory methods

#pragma once

#include "electronic_source.hpp"
#include "qd.hpp"

#include <vector>

namespace qdpol
{

/// Time stepping of one trajectory. All times in a.u.
struct TrajectoryOptions
{
	double dt = 0.1;
	/// electronic sub-steps per nuclear step
	Index n_sub = 100;
	Index n_steps = 0;
	/// record populations every out_every nuclear steps (and at t = 0)
	Index out_every = 1;
	double mass = 1836.0;
	bool lowdin = true;
	/// flat index of the initially occupied adiabatic-Fock state
	Index initial_state = 0;

	Index n_out() const { return n_steps / out_every + 1; }
};

/// Per-trajectory output: one population table per estimator, rows are output times
struct TrajectoryResult
{
	std::vector<Matrix> estimators;
	double max_energy_drift = 0.0;
	Index hops = 0;
	Index frustrated = 0;
};

/// Spot check of orthonormality and energy ordering at one geometry
void check_set_invariants(const AdiabaticSet& set, double tol = 1e-8);

/// Throws ContinuityError unless every same-index overlap is positive
void check_sign_continuity(const Matrix& s_el);

} // namespace qdpol
