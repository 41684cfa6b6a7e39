/// @file harness.cpp
/// @brief Configuration parsing, ensemble execution and population files

#include "qdpol/harness.hpp"

#include <json.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef QDPOL_VERSION
#define QDPOL_VERSION "unknown"
#endif

namespace qdpol
{

std::string method_name(Method m)
{
	switch (m)
	{
	case Method::Exact:
		return "exact";
	case Method::Ehrenfest:
		return "ehrenfest";
	case Method::Fssh:
		return "fssh";
	case Method::GammaSqc:
		return "gamma-sqc";
	case Method::SpinLsc:
		return "spin-lsc";
	}
	return "unknown";
}

Method parse_method(const std::string& s)
{
	for (Method m : {Method::Exact, Method::Ehrenfest, Method::Fssh, Method::GammaSqc, Method::SpinLsc})
	{
		if (method_name(m) == s)
		{
			return m;
		}
	}
	throw ConfigError("unknown method '" + s + "'");
}

RunConfig RunConfig::defaults_for(Method m)
{
	RunConfig c;
	c.method = m;
	if (m == Method::Ehrenfest || m == Method::Fssh)
	{
		c.dt = 0.1;
		c.n_sub = 100;
	}
	return c;
}

CavityParams RunConfig::cavity() const
{
	CavityParams c;
	c.omega_c = omega_c;
	c.g_c = g_c;
	c.n_fock = n_fock;
	return c;
}

Index RunConfig::n_steps() const
{
	return static_cast<Index>(std::llround(t_final / dt));
}

Index RunConfig::out_every() const
{
	return std::max<Index>(1, static_cast<Index>(std::llround(output_interval / dt)));
}

Index RunConfig::initial_index() const
{
	return state_index(initial_state, n_el, n_fock);
}

void RunConfig::validate() const
{
	if (n_el < 1 || n_fock < 1 || n_traj < 1 || n_sub < 1)
	{
		throw ConfigError("n_el, n_fock, n_traj and n_sub must be positive");
	}
	if (!(dt > 0) || !(t_final >= 0) || !(output_interval > 0))
	{
		throw ConfigError("dt and output_interval must be positive and t_final non-negative");
	}
	if (fssh_estimator < 1 || fssh_estimator > 3)
	{
		throw ConfigError("fssh_estimator must be 1, 2 or 3");
	}
	if (ehrenfest_basis != "qd" && ehrenfest_basis != "polariton")
	{
		throw ConfigError("ehrenfest_basis must be qd or polariton");
	}
	if (!(table_r_max > table_r_min) || !(table_h > 0))
	{
		throw ConfigError("electronic table range or spacing invalid");
	}
	if (!(omega0 > 0) || !(tail_tol > 0))
	{
		throw ConfigError("omega0 and tail_tol must be positive");
	}
	try
	{
		cavity().validate();
		model.validate();
		electronic_grid.validate();
		nuclear_grid.validate();
	}
	catch (const DomainError& e)
	{
		throw ConfigError(e.what());
	}
	(void)initial_index();
}

static double parse_number(const std::string& key, const std::string& v)
{
	std::size_t used = 0;
	double x;
	try
	{
		x = std::stod(v, &used);
	}
	catch (const std::exception&)
	{
		throw ConfigError("key '" + key + "': '" + v + "' is not a number");
	}
	if (v.find_first_not_of(" \t", used) != std::string::npos)
	{
		throw ConfigError("key '" + key + "': trailing text in '" + v + "'");
	}
	return x;
}

static Index parse_count(const std::string& key, const std::string& v)
{
	const double x = parse_number(key, v);
	if (x != std::floor(x) || std::abs(x) > 1e15)
	{
		throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
	}
	return static_cast<Index>(x);
}

/// "0.1 fs", "4.13 au" or a bare number in a.u.
static double parse_time(const std::string& key, const std::string& v)
{
	std::istringstream in(v);
	std::string num, unit, rest;
	in >> num >> unit >> rest;
	if (!rest.empty())
	{
		throw ConfigError("key '" + key + "': unexpected text in '" + v + "'");
	}
	const double x = parse_number(key, num);
	if (unit.empty() || unit == "au")
	{
		return x;
	}
	if (unit == "fs")
	{
		return fs_to_au(x);
	}
	throw ConfigError("key '" + key + "': unknown time unit '" + unit + "'");
}

static bool parse_bool(const std::string& key, const std::string& v)
{
	if (v == "true" || v == "1" || v == "yes")
	{
		return true;
	}
	if (v == "false" || v == "0" || v == "no")
	{
		return false;
	}
	throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

RunConfig parse_config(const std::string& text)
{
	boost::property_tree::ptree tree;
	std::istringstream in(text);
	try
	{
		boost::property_tree::ini_parser::read_ini(in, tree);
	}
	catch (const boost::property_tree::ini_parser_error& e)
	{
		throw ConfigError(std::string("config syntax: ") + e.what());
	}
	const auto method = tree.get_optional<std::string>("method");
	RunConfig c = RunConfig::defaults_for(method ? parse_method(*method) : Method::GammaSqc);

	using Setter = std::function<void(const std::string&, const std::string&)>;
	const auto num = [](double& f) { return Setter([&f](const std::string& k, const std::string& v) { f = parse_number(k, v); }); };
	const auto cnt = [](Index& f) { return Setter([&f](const std::string& k, const std::string& v) { f = parse_count(k, v); }); };
	const auto tim = [](double& f) { return Setter([&f](const std::string& k, const std::string& v) { f = parse_time(k, v); }); };
	const auto str = [](std::string& f) { return Setter([&f](const std::string&, const std::string& v) { f = v; }); };
	const auto flg = [](bool& f) { return Setter([&f](const std::string& k, const std::string& v) { f = parse_bool(k, v); }); };

	const std::map<std::string, Setter> setters = {
		{"method", [](const std::string&, const std::string&) {}},
		{"g_c", num(c.g_c)},
		{"omega_c", num(c.omega_c)},
		{"n_el", cnt(c.n_el)},
		{"n_fock", cnt(c.n_fock)},
		{"n_traj", cnt(c.n_traj)},
		{"dt", tim(c.dt)},
		{"n_sub", cnt(c.n_sub)},
		{"t_final", tim(c.t_final)},
		{"output_interval", tim(c.output_interval)},
		{"seed", [&c](const std::string& k, const std::string& v) {
			 const Index s = parse_count(k, v);
			 if (s < 0)
			 {
				 throw ConfigError("seed must be non-negative");
			 }
			 c.seed = static_cast<std::uint64_t>(s);
		 }},
		{"initial_state", str(c.initial_state)},
		{"R0", num(c.R0)},
		{"omega0", num(c.omega0)},
		{"mass", num(c.model.mass_M)},
		{"L", num(c.model.L)},
		{"a_plus", num(c.model.a_plus)},
		{"a_minus", num(c.model.a_minus)},
		{"a_f", num(c.model.a_f)},
		{"el_r_min", num(c.electronic_grid.r_min)},
		{"el_r_max", num(c.electronic_grid.r_max)},
		{"el_n_points", cnt(c.electronic_grid.n_points)},
		{"nuc_r_min", num(c.nuclear_grid.r_min)},
		{"nuc_r_max", num(c.nuclear_grid.r_max)},
		{"nuc_n_points", cnt(c.nuclear_grid.n_points)},
		{"fssh_estimator", [&c](const std::string& k, const std::string& v) { c.fssh_estimator = static_cast<int>(parse_count(k, v)); }},
		{"reverse_on_frustration", flg(c.reverse_on_frustration)},
		{"ehrenfest_basis", str(c.ehrenfest_basis)},
		{"lowdin", flg(c.lowdin)},
		{"table_r_min", num(c.table_r_min)},
		{"table_r_max", num(c.table_r_max)},
		{"table_h", num(c.table_h)},
		{"tail_tol", num(c.tail_tol)},
		{"output", str(c.output)},
	};
	for (const auto& [key, node] : tree)
	{
		if (!node.empty())
		{
			throw ConfigError("sections are not supported ('" + key + "')");
		}
		const auto it = setters.find(key);
		if (it == setters.end())
		{
			throw ConfigError("unknown config key '" + key + "'");
		}
		it->second(key, node.data());
	}
	c.validate();
	return c;
}

RunConfig load_config(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw ConfigError("cannot open config file '" + path + "'");
	}
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_config(buf.str());
}

static std::string fmt17(double x)
{
	if (std::isnan(x))
	{
		return "nan";
	}
	char b[40];
	std::snprintf(b, sizeof b, "%.17g", x);
	return b;
}

static std::map<std::string, std::string> config_map(const RunConfig& c)
{
	return {
		{"method", method_name(c.method)},
		{"g_c", fmt17(c.g_c)},
		{"omega_c", fmt17(c.omega_c)},
		{"n_el", std::to_string(c.n_el)},
		{"n_fock", std::to_string(c.n_fock)},
		{"n_traj", std::to_string(c.n_traj)},
		{"dt", fmt17(c.dt)},
		{"n_sub", std::to_string(c.n_sub)},
		{"t_final", fmt17(c.t_final)},
		{"output_interval", fmt17(c.output_interval)},
		{"seed", std::to_string(c.seed)},
		{"initial_state", c.initial_state},
		{"R0", fmt17(c.R0)},
		{"omega0", fmt17(c.omega0)},
		{"mass", fmt17(c.model.mass_M)},
		{"L", fmt17(c.model.L)},
		{"a_plus", fmt17(c.model.a_plus)},
		{"a_minus", fmt17(c.model.a_minus)},
		{"a_f", fmt17(c.model.a_f)},
		{"el_r_min", fmt17(c.electronic_grid.r_min)},
		{"el_r_max", fmt17(c.electronic_grid.r_max)},
		{"el_n_points", std::to_string(c.electronic_grid.n_points)},
		{"nuc_r_min", fmt17(c.nuclear_grid.r_min)},
		{"nuc_r_max", fmt17(c.nuclear_grid.r_max)},
		{"nuc_n_points", std::to_string(c.nuclear_grid.n_points)},
		{"fssh_estimator", std::to_string(c.fssh_estimator)},
		{"reverse_on_frustration", c.reverse_on_frustration ? "true" : "false"},
		{"ehrenfest_basis", c.ehrenfest_basis},
		{"lowdin", c.lowdin ? "true" : "false"},
		{"table_r_min", fmt17(c.table_r_min)},
		{"table_r_max", fmt17(c.table_r_max)},
		{"table_h", fmt17(c.table_h)},
		{"tail_tol", fmt17(c.tail_tol)},
	};
}

std::string canonical_config(const RunConfig& cfg)
{
	std::string out;
	for (const auto& [k, v] : config_map(cfg))
	{
		out += k + "=" + v + "\n";
	}
	return out;
}

std::string config_hash(const RunConfig& cfg)
{
	std::uint64_t h = 14695981039346656037ull;
	for (unsigned char ch : canonical_config(cfg))
	{
		h ^= ch;
		h *= 1099511628211ull;
	}
	char b[17];
	std::snprintf(b, sizeof b, "%016llx", static_cast<unsigned long long>(h));
	return b;
}

std::string state_label(Index alpha, Index n)
{
	static const std::string first = "gefh";
	std::string a;
	if (alpha < 4)
	{
		a = first.substr(static_cast<std::size_t>(alpha), 1);
	}
	else if (alpha < 4 + 18)
	{
		a = std::string(1, static_cast<char>('i' + (alpha - 4)));
	}
	else
	{
		a = "s" + std::to_string(alpha) + "_";
	}
	return a + std::to_string(n);
}

std::vector<std::string> state_labels(Index n_el, Index n_fock)
{
	std::vector<std::string> out;
	for (Index a = 0; a < n_el; a++)
	{
		for (Index n = 0; n < n_fock; n++)
		{
			out.push_back(state_label(a, n));
		}
	}
	return out;
}

Index state_index(const std::string& label, Index n_el, Index n_fock)
{
	const auto labels = state_labels(n_el, n_fock);
	const auto it = std::find(labels.begin(), labels.end(), label);
	if (it == labels.end())
	{
		throw ConfigError("state '" + label + "' is not in the configured basis");
	}
	return static_cast<Index>(it - labels.begin());
}

Index PopulationSeries::column(const std::string& label) const
{
	const auto it = std::find(labels.begin(), labels.end(), label);
	if (it == labels.end())
	{
		throw ShapeError("population series has no column '" + label + "'");
	}
	return static_cast<Index>(it - labels.begin());
}

std::pair<double, double> sample_wigner(double R0, double omega0, double mass, std::mt19937_64& rng)
{
	std::normal_distribution<double> r(R0, std::sqrt(1.0 / (2.0 * mass * omega0)));
	std::normal_distribution<double> p(0.0, std::sqrt(0.5 * mass * omega0));
	const double R = r(rng);
	const double P = p(rng);
	return {R, P};
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, Index index)
{
	const std::uint64_t s = seed ^ static_cast<std::uint64_t>(index);
	std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
	return std::mt19937_64(seq);
}

TabulatedDvrSource make_table(const RunConfig& cfg)
{
	return TabulatedDvrSource(cfg.electronic_grid, cfg.model, cfg.n_el, cfg.table_r_min, cfg.table_r_max, cfg.table_h);
}

static TrajectoryResult run_one(const RunConfig& cfg, const ElectronicSource& source, Index index)
{
	std::mt19937_64 rng = trajectory_rng(cfg.seed, index);
	const auto [R, P] = sample_wigner(cfg.R0, cfg.omega0, cfg.model.mass_M, rng);
	TrajectoryOptions opt;
	opt.dt = cfg.dt;
	opt.n_sub = cfg.n_sub;
	opt.n_steps = cfg.n_steps();
	opt.out_every = cfg.out_every();
	opt.mass = cfg.model.mass_M;
	opt.lowdin = cfg.lowdin;
	opt.initial_state = cfg.initial_index();
	const CavityParams cav = cfg.cavity();
	switch (cfg.method)
	{
	case Method::GammaSqc:
		return run_mapping_trajectory(source, cav, sqc_sample_initial(opt.initial_state, cfg.n_states(), rng), R, P, opt);
	case Method::SpinLsc:
		return run_mapping_trajectory(source, cav, spin_lsc_initial(opt.initial_state, cfg.n_states(), rng), R, P, opt);
	case Method::Ehrenfest:
		return cfg.ehrenfest_basis == "qd" ? run_ehrenfest_qd(source, cav, R, P, opt) : run_ehrenfest_polariton(source, cav, R, P, opt);
	case Method::Fssh:
		return run_fssh(source, cav, R, P, opt, rng, cfg.reverse_on_frustration);
	case Method::Exact:
		break;
	}
	throw ConfigError("run_one: method has no trajectories");
}

std::vector<PopulationSeries> run_ensemble(const RunConfig& cfg, unsigned threads)
{
	cfg.validate();
	if (cfg.method == Method::Exact)
	{
		return {run_exact(cfg)};
	}
	const TabulatedDvrSource table = make_table(cfg);
	return run_ensemble(cfg, table, threads);
}

std::vector<PopulationSeries> run_ensemble(const RunConfig& cfg, const ElectronicSource& source, unsigned threads)
{
	cfg.validate();
	if (cfg.method == Method::Exact)
	{
		return {run_exact(cfg)};
	}
	if (source.n_states() != cfg.n_el)
	{
		throw ConfigError("electronic source state count differs from n_el");
	}
	const Index n_series = (cfg.method == Method::Fssh) ? 3 : 1;
	const Index n_out = cfg.n_steps() / cfg.out_every() + 1;
	const Index n = cfg.n_states();
	const Index n_chunks = (cfg.n_traj + EnsembleChunk - 1) / EnsembleChunk;

	struct ChunkSum
	{
		std::vector<Matrix> sums;
		Index ok = 0;
		Index failed = 0;
		std::string first_error;
	};
	std::vector<ChunkSum> chunks(static_cast<std::size_t>(n_chunks));
	std::atomic<Index> next{0};
	std::exception_ptr fatal;
	std::mutex fatal_mutex;

	const auto worker = [&]() {
		for (;;)
		{
			const Index c = next.fetch_add(1);
			if (c >= n_chunks)
			{
				return;
			}
			ChunkSum& cs = chunks[static_cast<std::size_t>(c)];
			cs.sums.assign(static_cast<std::size_t>(n_series), Matrix::Zero(n_out, n));
			const Index end = std::min(cfg.n_traj, (c + 1) * EnsembleChunk);
			for (Index i = c * EnsembleChunk; i < end; i++)
			{
				try
				{
					const TrajectoryResult r = run_one(cfg, source, i);
					for (Index s = 0; s < n_series; s++)
					{
						cs.sums[static_cast<std::size_t>(s)] += r.estimators[static_cast<std::size_t>(s)];
					}
					cs.ok++;
				}
				catch (const Error& e)
				{
					if (cs.failed == 0)
					{
						cs.first_error = "trajectory " + std::to_string(i) + ": " + e.what();
					}
					cs.failed++;
				}
				catch (...)
				{
					std::lock_guard<std::mutex> lock(fatal_mutex);
					if (!fatal)
					{
						fatal = std::current_exception();
					}
					next.store(n_chunks);
					return;
				}
			}
		}
	};
	const unsigned nw = std::max(1u, threads);
	if (nw == 1)
	{
		worker();
	}
	else
	{
		std::vector<std::thread> pool;
		for (unsigned w = 0; w < nw; w++)
		{
			pool.emplace_back(worker);
		}
		for (auto& t : pool)
		{
			t.join();
		}
	}
	if (fatal)
	{
		std::rethrow_exception(fatal);
	}

	std::vector<Matrix> total(static_cast<std::size_t>(n_series), Matrix::Zero(n_out, n));
	Index ok = 0, failed = 0;
	std::string first_error;
	for (const ChunkSum& cs : chunks)
	{
		for (Index s = 0; s < n_series; s++)
		{
			total[static_cast<std::size_t>(s)] += cs.sums[static_cast<std::size_t>(s)];
		}
		ok += cs.ok;
		if (failed == 0 && cs.failed > 0)
		{
			first_error = cs.first_error;
		}
		failed += cs.failed;
	}
	if (static_cast<double>(failed) > MaxAbortFraction * static_cast<double>(cfg.n_traj) || ok == 0)
	{
		throw NumericalError(std::to_string(failed) + " of " + std::to_string(cfg.n_traj)
			+ " trajectories aborted (limit 1%); first failure: " + first_error);
	}

	std::vector<PopulationSeries> out;
	for (Index s = 0; s < n_series; s++)
	{
		PopulationSeries ps;
		ps.method = method_name(cfg.method) + (n_series > 1 ? "-m" + std::to_string(s + 1) : "");
		ps.seed = cfg.seed;
		ps.n_traj = ok;
		ps.n_failed = failed;
		ps.config_hash = config_hash(cfg);
		ps.labels = state_labels(cfg.n_el, cfg.n_fock);
		ps.times.resize(n_out);
		for (Index k = 0; k < n_out; k++)
		{
			ps.times(k) = au_to_fs(static_cast<double>(k * cfg.out_every()) * cfg.dt);
		}
		Matrix& m = total[static_cast<std::size_t>(s)];
		if (cfg.method == Method::GammaSqc)
		{
			// normalize over binned trajectories only; rows with none binned stay missing
			for (Index k = 0; k < n_out; k++)
			{
				const double w = m.row(k).sum();
				if (w > 0)
				{
					m.row(k) /= w;
				}
				else
				{
					m.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
				}
			}
		}
		else
		{
			m /= static_cast<double>(ok);
		}
		ps.populations = std::move(m);
		out.push_back(std::move(ps));
	}
	return out;
}

PopulationSeries run_exact(const RunConfig& cfg, ExactSeries* raw)
{
	cfg.validate();
	const ExactBasis basis = make_exact_basis(cfg.electronic_grid, cfg.model, cfg.nuclear_grid, cfg.n_el, cfg.n_fock);
	const Matrix H = build_total_hamiltonian(basis, cfg.cavity(), cfg.model.mass_M);
	const Vector psi0 = initial_wavepacket(basis, cfg.R0, cfg.omega0, cfg.model.mass_M, cfg.initial_index(), cfg.tail_tol);
	const Index nt = static_cast<Index>(std::llround(cfg.t_final / cfg.output_interval)) + 1;
	Vector times(nt);
	for (Index k = 0; k < nt; k++)
	{
		times(k) = static_cast<double>(k) * cfg.output_interval;
	}
	ExactSeries es = propagate_exact(H, psi0, times, basis.n_channels());

	PopulationSeries ps;
	ps.method = "exact";
	ps.config_hash = config_hash(cfg);
	ps.labels = state_labels(cfg.n_el, cfg.n_fock);
	ps.times = es.times / AuPerFs;
	ps.populations = es.populations;
	if (raw != nullptr)
	{
		*raw = std::move(es);
	}
	return ps;
}

std::string to_csv(const PopulationSeries& s)
{
	std::string out = "time_fs";
	for (const std::string& l : s.labels)
	{
		out += ",pop_" + l;
	}
	out += "\n";
	for (Index k = 0; k < s.times.size(); k++)
	{
		out += fmt17(s.times(k));
		for (Index j = 0; j < s.populations.cols(); j++)
		{
			out += "," + fmt17(s.populations(k, j));
		}
		out += "\n";
	}
	return out;
}

void write_csv(const PopulationSeries& s, const std::string& path)
{
	std::ofstream out(path, std::ios::binary);
	if (!out)
	{
		throw Error("cannot write '" + path + "'");
	}
	out << to_csv(s);
	if (!out)
	{
		throw Error("write to '" + path + "' failed");
	}
}

static std::vector<std::string> split(const std::string& line, char sep)
{
	std::vector<std::string> out;
	std::string cur;
	std::istringstream in(line);
	while (std::getline(in, cur, sep))
	{
		out.push_back(cur);
	}
	return out;
}

PopulationSeries read_csv(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
	{
		throw Error("cannot open '" + path + "'");
	}
	std::string line;
	if (!std::getline(in, line))
	{
		throw Error("'" + path + "' is empty");
	}
	const auto head = split(line, ',');
	if (head.empty() || head[0] != "time_fs")
	{
		throw Error("'" + path + "': header must start with time_fs");
	}
	PopulationSeries s;
	for (std::size_t j = 1; j < head.size(); j++)
	{
		if (head[j].rfind("pop_", 0) != 0)
		{
			throw Error("'" + path + "': column '" + head[j] + "' is not a population");
		}
		s.labels.push_back(head[j].substr(4));
	}
	std::vector<std::vector<double>> rows;
	Index lineno = 1;
	while (std::getline(in, line))
	{
		lineno++;
		if (line.empty())
		{
			continue;
		}
		const auto f = split(line, ',');
		if (f.size() != head.size())
		{
			throw Error("'" + path + "' line " + std::to_string(lineno) + ": wrong field count");
		}
		std::vector<double> row;
		for (const std::string& x : f)
		{
			char* end = nullptr;
			const double v = std::strtod(x.c_str(), &end);
			if (end == x.c_str() || *end != '\0')
			{
				throw Error("'" + path + "' line " + std::to_string(lineno) + ": bad number '" + x + "'");
			}
			row.push_back(v);
		}
		rows.push_back(std::move(row));
	}
	const Index nt = static_cast<Index>(rows.size());
	const Index nc = static_cast<Index>(s.labels.size());
	s.times.resize(nt);
	s.populations.resize(nt, nc);
	for (Index k = 0; k < nt; k++)
	{
		s.times(k) = rows[static_cast<std::size_t>(k)][0];
		for (Index j = 0; j < nc; j++)
		{
			s.populations(k, j) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j + 1)];
		}
	}
	return s;
}

void write_sidecar(const PopulationSeries& s, const RunConfig& cfg, const std::string& path)
{
	nlohmann::ordered_json j;
	j["method"] = s.method;
	j["version"] = QDPOL_VERSION;
	j["config_hash"] = config_hash(cfg);
	j["seed"] = s.seed;
	j["n_traj"] = s.n_traj;
	j["n_failed"] = s.n_failed;
	j["labels"] = s.labels;
	j["time_unit"] = "fs";
	nlohmann::ordered_json c;
	for (const auto& [k, v] : config_map(cfg))
	{
		c[k] = v;
	}
	c["output"] = cfg.output;
	j["config"] = c;
	std::ofstream out(path);
	if (!out)
	{
		throw Error("cannot write '" + path + "'");
	}
	out << j.dump(2) << "\n";
}

double interpolate_at(const PopulationSeries& s, Index column, double t)
{
	const Index n = s.times.size();
	if (n == 0 || t < s.times(0) || t > s.times(n - 1))
	{
		throw DomainError("interpolate_at: time outside the series");
	}
	const double* b = s.times.data();
	Index k = static_cast<Index>(std::upper_bound(b, b + n, t) - b) - 1;
	k = std::clamp<Index>(k, 0, n - 2 < 0 ? 0 : n - 2);
	if (n == 1)
	{
		return s.populations(0, column);
	}
	const double f = (t - s.times(k)) / (s.times(k + 1) - s.times(k));
	return (1.0 - f) * s.populations(k, column) + f * s.populations(k + 1, column);
}

static Comparison compare_columns(const PopulationSeries& a, const PopulationSeries& b, const std::vector<std::string>& labels,
	double t_min, double t_max)
{
	Comparison c;
	double sq = 0.0;
	const double lo = std::max(t_min, b.times(0));
	const double hi = std::min(t_max, b.times(b.times.size() - 1));
	for (const std::string& l : labels)
	{
		const Index ja = a.column(l), jb = b.column(l);
		for (Index k = 0; k < a.times.size(); k++)
		{
			const double t = a.times(k);
			if (t < lo - 1e-12 || t > hi + 1e-12)
			{
				continue;
			}
			const double d = a.populations(k, ja) - interpolate_at(b, jb, std::clamp(t, b.times(0), b.times(b.times.size() - 1)));
			if (std::isnan(d))
			{
				continue;
			}
			c.max_abs = std::max(c.max_abs, std::abs(d));
			sq += d * d;
			c.n_points++;
		}
	}
	c.rms = c.n_points > 0 ? std::sqrt(sq / static_cast<double>(c.n_points)) : std::numeric_limits<double>::quiet_NaN();
	return c;
}

Comparison compare(const PopulationSeries& a, const PopulationSeries& b, double t_min, double t_max)
{
	std::vector<std::string> shared;
	for (const std::string& l : a.labels)
	{
		if (std::find(b.labels.begin(), b.labels.end(), l) != b.labels.end())
		{
			shared.push_back(l);
		}
	}
	if (shared.empty())
	{
		throw ShapeError("compare: the series share no population labels");
	}
	return compare_columns(a, b, shared, t_min, t_max);
}

Comparison compare(const PopulationSeries& a, const PopulationSeries& b, const std::string& label, double t_min, double t_max)
{
	return compare_columns(a, b, {label}, t_min, t_max);
}

SurfaceScan scan_surfaces(const RunConfig& cfg, double r_min, double r_max, double step)
{
	if (!(r_max >= r_min) || !(step > 0))
	{
		throw DomainError("scan_surfaces: invalid range");
	}
	const Index n = static_cast<Index>(std::floor((r_max - r_min) / step + 1e-9)) + 1;
	const CavityParams cav = cfg.cavity();
	SurfaceScan s;
	s.R.resize(n);
	s.energies.resize(n, cfg.n_states());
	s.photon_number.resize(n, cfg.n_states());
	AdiabaticSet prev;
	for (Index k = 0; k < n; k++)
	{
		const double R = r_min + static_cast<double>(k) * step;
		AdiabaticSet set = solve_adiabatic(cfg.electronic_grid, cfg.model, R, cfg.n_el, k > 0 ? &prev : nullptr);
		const PolaritonMatrices pm = polariton_eigen(build_v_matrix(set, cav), cav.n_fock);
		s.R(k) = R;
		s.energies.row(k) = pm.eigvals.transpose();
		for (Index j = 0; j < cfg.n_states(); j++)
		{
			s.photon_number(k, j) = photon_number_expectation(pm, j);
		}
		prev = std::move(set);
	}
	return s;
}

void write_surfaces(const SurfaceScan& s, const std::string& path)
{
	std::ofstream out(path);
	if (!out)
	{
		throw Error("cannot write '" + path + "'");
	}
	const Index n = s.energies.cols();
	out << "R";
	for (Index j = 0; j < n; j++)
	{
		out << ",E" << j;
	}
	for (Index j = 0; j < n; j++)
	{
		out << ",nphot" << j;
	}
	out << "\n";
	for (Index k = 0; k < s.R.size(); k++)
	{
		out << fmt17(s.R(k));
		for (Index j = 0; j < n; j++)
		{
			out << "," << fmt17(s.energies(k, j));
		}
		for (Index j = 0; j < n; j++)
		{
			out << "," << fmt17(s.photon_number(k, j));
		}
		out << "\n";
	}
}

/// Figure tag for a configuration: 2 x 2 runs at weak and strong coupling, and the larger basis
static std::string figure_tag(const RunConfig& cfg)
{
	if (cfg.n_el >= 3 || cfg.n_fock >= 3)
	{
		return "fig4";
	}
	return cfg.g_c < 0.003 ? "fig2" : "fig3";
}

std::vector<std::string> write_plot_data(const std::vector<PopulationSeries>& series, const RunConfig& cfg, const std::string& dir)
{
	std::filesystem::create_directories(dir);
	std::vector<std::string> written;
	char gc[32];
	std::snprintf(gc, sizeof gc, "%g", cfg.g_c);
	for (const PopulationSeries& s : series)
	{
		std::vector<std::string> tags = {figure_tag(cfg)};
		if (cfg.method == Method::Fssh)
		{
			tags.push_back("figC1");
		}
		for (const std::string& tag : tags)
		{
			const std::string path = (std::filesystem::path(dir) / (tag + "_" + s.method + "_gc" + gc + ".dat")).string();
			std::ofstream out(path);
			if (!out)
			{
				throw Error("cannot write '" + path + "'");
			}
			out << "# " << tag << " " << s.method << " g_c=" << gc << " n_traj=" << s.n_traj << "\n# time_fs";
			for (const std::string& l : s.labels)
			{
				out << " " << l;
			}
			out << "\n";
			for (Index k = 0; k < s.times.size(); k++)
			{
				out << fmt17(s.times(k));
				for (Index j = 0; j < s.populations.cols(); j++)
				{
					out << " " << fmt17(s.populations(k, j));
				}
				out << "\n";
			}
			written.push_back(path);
		}
	}
	return written;
}

} // namespace qdpol
