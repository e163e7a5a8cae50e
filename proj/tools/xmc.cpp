/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/

// xmc: adaptive approximate model counter for CNF and SMT bit-vector
// formulas. Estimates log2 of the projected model count by iterating
// XOR-streamlined enumeration queries against a particle-filter posterior.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <xmc/cnf.hpp>
#include <xmc/driver.hpp>
#include <xmc/generators.hpp>
#include <xmc/oracle.hpp>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_aborted = 2;
constexpr int exit_input_error = 3;
constexpr int exit_solver_error = 4;

xmc::prior_spec parse_prior(std::string const& text)
{
	if (text == "uniform-width")
		return {xmc::prior_spec::kind::uniform_width, 0, 0};
	if (text == "uniform-64")
		return {xmc::prior_spec::kind::uniform_64, 0, 0};
	if (text.rfind("uniform:", 0) == 0) {
		auto const rest = text.substr(8);
		auto const colon = rest.find(':');
		if (colon != std::string::npos) {
			try {
				double const lo = std::stod(rest.substr(0, colon));
				double const hi = std::stod(rest.substr(colon + 1));
				return {xmc::prior_spec::kind::custom_range, lo, hi};
			} catch (...) {
			}
		}
	}
	throw xmc::input_error("bad prior '" + text
	                       + "', expected uniform-width | uniform-64 | uniform:<lo>:<hi>");
}

std::string read_file(std::string const& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw xmc::input_error("cannot open " + path);
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

struct generator_spec {
	enum class kind { planted, random } which = kind::planted;
	int a = 0, b = 0, c = 0;
};

generator_spec parse_generator(std::string const& text)
{
	generator_spec g;
	std::istringstream ss(text);
	std::string head;
	std::getline(ss, head, ':');
	char sep = 0;
	if (head == "planted") {
		g.which = generator_spec::kind::planted;
		if (ss >> g.a >> sep >> g.b && sep == ':')
			return g;
	} else if (head == "random") {
		g.which = generator_spec::kind::random;
		char sep2 = 0;
		if (ss >> g.a >> sep >> g.b >> sep2 >> g.c && sep == ':' && sep2 == ':')
			return g;
	}
	throw xmc::input_error("bad generator '" + text
	                       + "', expected planted:<width>:<log2count> or "
	                         "random:<vars>:<clauses>:<projected>");
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"xmc: adaptive approximate model counter (CNF and SMT bit-vector)"};
	app.require_subcommand(1);

	// shared estimator knobs
	xmc::run_config cfg;
	std::string prior_text = "uniform-64";
	std::string format = "text";
	bool verbose = false;

	auto add_run_options = [&](CLI::App* cmd) {
		cmd->add_option("--cl", cfg.cl, "Confidence level in (0,1)")->capture_default_str();
		cmd->add_option("--alpha", cfg.alpha, "Confidence-level adjustment in [0,1)")
		    ->capture_default_str();
		cmd->add_option("--thres", cfg.thres, "Stop once the interval is this narrow (bits)")
		    ->capture_default_str();
		cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
		cmd->add_option("--particles", cfg.n_particles, "Particle count")
		    ->capture_default_str();
		cmd->add_option("--prior", prior_text,
		                "Initial distribution: uniform-width | uniform-64 | uniform:<lo>:<hi>")
		    ->capture_default_str();
		cmd->add_option("--max-iterations", cfg.max_iterations, "Iteration cap")
		    ->capture_default_str();
		cmd->add_option("--exhaust-cap", cfg.exhaust_cap,
		                "Safety cap on any single enumeration")
		    ->capture_default_str();
		cmd->add_option("--conflict-budget", cfg.solver_conflict_budget,
		                "Embedded solver conflicts per call, 0 = unlimited")
		    ->capture_default_str();
		cmd->add_option("--format", format, "Output format: text | structured")
		    ->check(CLI::IsMember({"text", "structured"}))
		    ->capture_default_str();
		cmd->add_flag("--verbose", verbose, "Log per-iteration progress to stderr");
	};

	// count
	auto* count = app.add_subcommand("count", "Count models of one formula");
	std::string input_path;
	std::string mode = "cnf";
	std::string output_name;
	unsigned output_width = 0;
	std::string logic;
	std::string float_view_text;
	std::string solver_cmd;
	int query_timeout_ms = 0;
	count->add_option("input", input_path, "Input file (DIMACS CNF or SMT-LIB2)")->required();
	count->add_option("--mode", mode, "Input kind")
	    ->check(CLI::IsMember({"cnf", "smt"}))
	    ->capture_default_str();
	count->add_option("--output-name", output_name, "SMT mode: designated output term");
	count->add_option("--output-width", output_width, "SMT mode: output width in bits");
	count->add_option("--logic", logic, "SMT mode: emit (set-logic ...) before the script");
	count->add_option("--output-float", float_view_text,
	                  "SMT mode: output is a float; count its IEEE bit patterns "
	                  "(<exponent>:<significand> bits)");
	count->add_option("--solver-cmd", solver_cmd, "SMT mode: solver command (SMT-LIB2 on stdio)");
	count->add_option("--query-timeout-ms", query_timeout_ms,
	                  "SMT mode: per-query time limit (0 = none)")
	    ->capture_default_str();
	count->add_flag("--sound", cfg.sound,
	                "Also derive probabilistically sound bounds; thres applies to them");
	add_run_options(count);

	// calibrate
	auto* calibrate = app.add_subcommand("calibrate",
	                                     "Coverage study on a generated formula with known count");
	std::string generator_text = "planted:16:10";
	int runs = 100;
	int jobs = 1;
	calibrate->add_option("--generator", generator_text,
	                      "planted:<width>:<log2count> or random:<vars>:<clauses>:<projected>")
	    ->capture_default_str();
	calibrate->add_option("--runs", runs, "Number of seeded runs")->capture_default_str();
	calibrate->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
	add_run_options(calibrate);

	CLI11_PARSE(app, argc, argv);

	try {
		cfg.prior = parse_prior(prior_text);
		if (verbose)
			cfg.verbose = &std::cerr;

		if (count->parsed()) {
			xmc::count_report report;
			if (mode == "cnf") {
				std::ifstream in(input_path, std::ios::binary);
				if (!in)
					throw xmc::input_error("cannot open " + input_path);
				auto const formula = xmc::parse_dimacs(in);
				report = xmc::run_count(formula, cfg);
			} else {
				if (output_name.empty() || output_width == 0)
					throw xmc::input_error(
					    "smt mode needs --output-name and --output-width");
				if (solver_cmd.empty())
					throw xmc::input_error("smt mode needs --solver-cmd");
				xmc::smt_problem problem;
				problem.script = read_file(input_path);
				problem.output_name = output_name;
				problem.output_width = output_width;
				problem.logic = logic;
				if (!float_view_text.empty()) {
					auto const colon = float_view_text.find(':');
					if (colon == std::string::npos)
						throw xmc::input_error("--output-float wants <eb>:<sb>");
					problem.float_view = {{unsigned(std::stoul(float_view_text.substr(0, colon))),
					                       unsigned(std::stoul(float_view_text.substr(colon + 1)))}};
				}
				xmc::solver_process_config sp;
				sp.command = solver_cmd;
				sp.query_timeout_ms = query_timeout_ms;
				report = xmc::run_count(problem, sp, cfg);
			}
			std::cout << (format == "text" ? report.to_text() : report.to_json() + "\n");
			return report.status == xmc::count_status::aborted ? exit_aborted : exit_ok;
		}

		// calibrate
		auto const gen = parse_generator(generator_text);
		xmc::random_source gen_rng(cfg.seed);
		auto& gs = gen_rng.stream("generator");
		xmc::cnf_formula formula;
		if (gen.which == generator_spec::kind::planted)
			formula = xmc::planted_formula(gen.a, gen.b, gs);
		else
			formula = xmc::random_cnf(gen.a, gen.b, gen.c, gs);
		auto const truth = xmc::oracle::exact_count(formula, cfg.exhaust_cap, false);
		auto const table = xmc::calibrate(formula, truth.count, cfg, runs, jobs);
		std::cout << (format == "text" ? table.to_text() : table.to_json() + "\n");
		return exit_ok;
	} catch (xmc::parse_error const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_input_error;
	} catch (xmc::input_error const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_input_error;
	} catch (xmc::solver_error const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_solver_error;
	} catch (xmc::smt_error const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_solver_error;
	} catch (std::exception const& e) {
		std::cerr << "error: " << e.what() << "\n";
		return exit_input_error;
	}
}
