/// @file qdpol.cpp
/// @brief Command-line driver: run, scan-surfaces, compare

#include "qdpol/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

using namespace qdpol;

static std::string sidecar_path(const std::string& csv)
{
	return csv + ".json";
}

int main(int argc, char** argv)
{
	CLI::App app{"Quasi-diabatic polariton dynamics for a Shin-Metiu molecule in a cavity"};
	app.require_subcommand(1);

	std::string config_path, plot_dir, output;
	long long seed = -1;
	long long n_traj = -1;
	unsigned threads = std::max(1u, std::thread::hardware_concurrency());

	CLI::App* run = app.add_subcommand("run", "Run the configured method and write populations");
	run->add_option("config", config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
	run->add_option("--seed", seed, "Override the configured seed");
	run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
	run->add_option("--n-traj", n_traj, "Override the trajectory count");
	run->add_option("-o,--output", output, "Override the output CSV path");
	run->add_option("--plot-data", plot_dir, "Also write figure-layout data files into this directory");

	std::string scan_config, scan_out = "surfaces.csv";
	double scan_min = -8.0, scan_max = 8.0, scan_step = 0.05;
	CLI::App* scan = app.add_subcommand("scan-surfaces", "Polariton energies and photon numbers over R");
	scan->add_option("config", scan_config, "configuration file")->required()->check(CLI::ExistingFile);
	scan->add_option("-o,--output", scan_out, "Output CSV");
	scan->add_option("--r-min", scan_min, "First geometry");
	scan->add_option("--r-max", scan_max, "Last geometry");
	scan->add_option("--step", scan_step, "Geometry step");

	std::string cmp_a, cmp_b;
	double cmp_t0 = -1e300, cmp_t1 = 1e300;
	CLI::App* cmp = app.add_subcommand("compare", "Max-abs and RMS population differences of two CSV files");
	cmp->add_option("a", cmp_a, "Reference CSV")->required()->check(CLI::ExistingFile);
	cmp->add_option("b", cmp_b, "CSV interpolated onto a's times")->required()->check(CLI::ExistingFile);
	cmp->add_option("--t-min", cmp_t0, "Window start (fs)");
	cmp->add_option("--t-max", cmp_t1, "Window end (fs)");

	CLI11_PARSE(app, argc, argv);

	try
	{
		if (*run)
		{
			RunConfig cfg = load_config(config_path);
			if (seed >= 0)
			{
				cfg.seed = static_cast<std::uint64_t>(seed);
			}
			if (n_traj > 0)
			{
				cfg.n_traj = static_cast<Index>(n_traj);
			}
			if (!output.empty())
			{
				cfg.output = output;
			}
			cfg.validate();
			const auto series = run_ensemble(cfg, threads);
			const std::size_t primary = (cfg.method == Method::Fssh) ? static_cast<std::size_t>(cfg.fssh_estimator - 1) : 0;
			write_csv(series[primary], cfg.output);
			write_sidecar(series[primary], cfg, sidecar_path(cfg.output));
			std::printf("%s: %s, %lld trajectories (%lld aborted), hash %s\n", cfg.output.c_str(), series[primary].method.c_str(),
				static_cast<long long>(series[primary].n_traj), static_cast<long long>(series[primary].n_failed),
				config_hash(cfg).c_str());
			if (!plot_dir.empty())
			{
				for (const std::string& p : write_plot_data(series, cfg, plot_dir))
				{
					std::printf("%s\n", p.c_str());
				}
			}
		}
		else if (*scan)
		{
			const RunConfig cfg = load_config(scan_config);
			write_surfaces(scan_surfaces(cfg, scan_min, scan_max, scan_step), scan_out);
			std::printf("%s\n", scan_out.c_str());
		}
		else if (*cmp)
		{
			const Comparison c = compare(read_csv(cmp_a), read_csv(cmp_b), cmp_t0, cmp_t1);
			std::printf("max_abs %.6e\nrms %.6e\npoints %lld\n", c.max_abs, c.rms, static_cast<long long>(c.n_points));
		}
	}
	catch (const std::exception& e)
	{
		std::fprintf(stderr, "qdpol: %s\n", e.what());
		return 1;
	}
	return 0;
}
