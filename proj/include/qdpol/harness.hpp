/// @file harness.hpp
/// @brief Run configuration, Wigner sampling, seeded ensembles and population I/O

#pragma once

#include "exact.hpp"
#include "mapping.hpp"
#include "mqc.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace qdpol
{

enum class Method
{
	Exact,
	Ehrenfest,
	Fssh,
	GammaSqc,
	SpinLsc,
};

std::string method_name(Method m);
Method parse_method(const std::string& s);

/// Everything that determines a run. Times are stored in a.u.
struct RunConfig
{
	Method method = Method::GammaSqc;
	double g_c = 0.001;
	double omega_c = 0.1;
	Index n_el = 2;
	Index n_fock = 2;
	Index n_traj = 5000;
	double dt = 0.1 * AuPerFs;
	Index n_sub = 100;
	double t_final = 30.0 * AuPerFs;
	/// spacing of recorded times; the nearest whole number of steps is used
	double output_interval = 0.1 * AuPerFs;
	std::uint64_t seed = 20230101;
	/// label of the initially occupied adiabatic-Fock state
	std::string initial_state = "e0";
	double R0 = -4.0;
	double omega0 = 0.000382;
	SmParams model;
	DvrGrid electronic_grid;
	DvrGrid nuclear_grid{-8.0, 8.0, 201};
	/// 1, 2 or 3; selects the FSSH series written as the primary output
	int fssh_estimator = 2;
	bool reverse_on_frustration = false;
	/// "qd" or "polariton"
	std::string ehrenfest_basis = "qd";
	bool lowdin = true;
	double table_r_min = -9.0;
	double table_r_max = 9.0;
	double table_h = 0.02;
	double tail_tol = 1e-5;
	std::string output = "populations.csv";

	/// Method-dependent time step defaults: 0.1 fs with 100 sub-steps for mapping, 0.1 a.u. with 100 for MQC
	static RunConfig defaults_for(Method m);
	void validate() const;
	CavityParams cavity() const;
	Index n_states() const { return n_el * n_fock; }
	Index n_steps() const;
	Index out_every() const;
	Index initial_index() const;
};

/// key = value file; unknown keys are rejected. Times take an optional "fs" or "au" suffix (default a.u.).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

/// Sorted key=value lines with 17 significant digits; the input to config_hash
std::string canonical_config(const RunConfig& cfg);
/// FNV-1a 64 of canonical_config, as 16 hex digits
std::string config_hash(const RunConfig& cfg);

/// pop label of flat index i: electronic letter (g, e, f, h, then i, j, ...) followed by the photon number
std::string state_label(Index alpha, Index n);
std::vector<std::string> state_labels(Index n_el, Index n_fock);
/// flat index of a label such as "e0"; throws ConfigError if absent
Index state_index(const std::string& label, Index n_el, Index n_fock);

/// Time-indexed populations with ensemble metadata
struct PopulationSeries
{
	/// fs
	Vector times;
	/// rows are times, columns follow labels
	Matrix populations;
	std::vector<std::string> labels;
	std::string method;
	std::uint64_t seed = 0;
	Index n_traj = 0;
	Index n_failed = 0;
	std::string config_hash;

	Index column(const std::string& label) const;
};

/// R ~ N(R0, 1/(2 M omega0)), P ~ N(0, M omega0 / 2)
std::pair<double, double> sample_wigner(double R0, double omega0, double mass, std::mt19937_64& rng);

/// Independent stream for trajectory index from the run seed
std::mt19937_64 trajectory_rng(std::uint64_t seed, Index index);

/// Trajectories per merge chunk; fixes the summation order independently of the worker count
inline constexpr Index EnsembleChunk = 50;
/// Largest tolerated fraction of aborted trajectories
inline constexpr double MaxAbortFraction = 0.01;

/// Runs the configured method. One series is returned, except FSSH which returns methods 1, 2, 3.
/// Deterministic in (config, seed) for any worker count.
std::vector<PopulationSeries> run_ensemble(const RunConfig& cfg, unsigned threads = 1);

/// Same, reusing an electronic table built for this configuration
std::vector<PopulationSeries> run_ensemble(const RunConfig& cfg, const ElectronicSource& source, unsigned threads = 1);

/// Table covering the configuration's range and spacing
TabulatedDvrSource make_table(const RunConfig& cfg);

/// Exact reference series on the configured nuclear grid
PopulationSeries run_exact(const RunConfig& cfg, ExactSeries* raw = nullptr);

/// time_fs,pop_<label>,... with %.17g and "nan" for missing values
void write_csv(const PopulationSeries& s, const std::string& path);
PopulationSeries read_csv(const std::string& path);
std::string to_csv(const PopulationSeries& s);

/// JSON sidecar with the canonical configuration, its hash and the code version
void write_sidecar(const PopulationSeries& s, const RunConfig& cfg, const std::string& path);

struct Comparison
{
	double max_abs = 0.0;
	double rms = 0.0;
	Index n_points = 0;
};

/// b is linearly interpolated onto a's times inside the common range; shared labels only
Comparison compare(const PopulationSeries& a, const PopulationSeries& b, double t_min = -1e300, double t_max = 1e300);
/// Restricted to one label
Comparison compare(const PopulationSeries& a, const PopulationSeries& b, const std::string& label, double t_min = -1e300, double t_max = 1e300);

/// Value of a column at time t by linear interpolation
double interpolate_at(const PopulationSeries& s, Index column, double t);

/// Polariton surfaces over R: energies and photon-number expectations
struct SurfaceScan
{
	Vector R;
	Matrix energies;
	Matrix photon_number;
};
SurfaceScan scan_surfaces(const RunConfig& cfg, double r_min, double r_max, double step);
void write_surfaces(const SurfaceScan& s, const std::string& path);

/// Figure-layout data files for --plot-data; returns the written paths
std::vector<std::string> write_plot_data(const std::vector<PopulationSeries>& series, const RunConfig& cfg, const std::string& dir);

} // namespace qdpol
