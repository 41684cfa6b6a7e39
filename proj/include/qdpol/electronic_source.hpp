/// @file electronic_source.hpp
/// @brief Adiabatic data on demand: direct DVR solves or a Hermite-interpolated table

#pragma once

#include "dvr.hpp"

#include <memory>
#include <vector>

namespace qdpol
{

/// Supplies AdiabaticSet values (with dipole_grad) at arbitrary R. Implementations are immutable.
class ElectronicSource
{
public:
	virtual ~ElectronicSource() = default;

	/// @param phase_reference previous set along the trajectory, or nullptr
	virtual AdiabaticSet at(double R, const AdiabaticSet* phase_reference) const = 0;
	virtual Index n_states() const = 0;
	virtual const DvrGrid& grid() const = 0;
};

/// One DVR diagonalization per call plus two for the dipole derivative
class DirectDvrSource final : public ElectronicSource
{
public:
	DirectDvrSource(DvrGrid grid, SmParams params, Index n_states, double delta_R = 1e-4);

	AdiabaticSet at(double R, const AdiabaticSet* phase_reference) const override;
	Index n_states() const override { return n_states_; }
	const DvrGrid& grid() const override { return grid_; }

private:
	DvrGrid grid_;
	SmParams params_;
	Index n_states_;
	double delta_R_;
};

/// Nodes on a uniform R grid holding energies, dipoles and coefficients with exact R-derivatives.
/// Values between nodes come from cubic Hermite interpolation; NAC and gradients are the
/// derivatives of the interpolants, so forces stay consistent with the interpolated potential.
class TabulatedDvrSource final : public ElectronicSource
{
public:
	TabulatedDvrSource(DvrGrid grid, SmParams params, Index n_states, double R_min, double R_max, double h);

	AdiabaticSet at(double R, const AdiabaticSet* phase_reference) const override;
	Index n_states() const override { return n_states_; }
	const DvrGrid& grid() const override { return grid_; }

	double R_min() const { return R_min_; }
	double R_max() const { return R_max_; }
	Index n_nodes() const { return static_cast<Index>(nodes_.size()); }

private:
	struct Node
	{
		Vector e, de;
		Matrix mu, dmu;
		Matrix c, dc;
	};

	DvrGrid grid_;
	SmParams params_;
	Index n_states_;
	double R_min_, R_max_, h_;
	std::vector<Node> nodes_;
};

/// Exact R-derivatives of the lowest n_states at one geometry, from the full spectrum
struct ExactDerivatives
{
	AdiabaticSet set;
	Matrix dc;
	Matrix dmu;
};
ExactDerivatives exact_derivatives(const DvrGrid& grid, const SmParams& params, double R, Index n_states, const Matrix* phase_reference);

/// Flips states of a set by the given signs, keeping every matrix consistent
void apply_signs(AdiabaticSet& set, const Vector& signs);

} // namespace qdpol
