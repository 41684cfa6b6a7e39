/// @file dynamics.cpp
/// @brief Invariant checks shared by the trajectory methods

#include "qdpol/dynamics.hpp"

#include <string>

namespace qdpol
{

void check_set_invariants(const AdiabaticSet& set, double tol)
{
	const Index n = set.n_states();
	const double orth = (set.coeffs.transpose() * set.coeffs - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
	if (!(orth < tol))
	{
		throw NumericalError("adiabatic states lost orthonormality at R = " + std::to_string(set.geometry_R));
	}
	for (Index a = 1; a < n; a++)
	{
		if (!(set.energies(a) >= set.energies(a - 1)))
		{
			throw NumericalError("adiabatic energies out of order at R = " + std::to_string(set.geometry_R));
		}
	}
}

void check_sign_continuity(const Matrix& s_el)
{
	for (Index a = 0; a < s_el.rows(); a++)
	{
		if (!(s_el(a, a) > 0))
		{
			throw ContinuityError("non-positive same-state overlap " + std::to_string(s_el(a, a)) + " for state " + std::to_string(a));
		}
	}
}

} // namespace qdpol
