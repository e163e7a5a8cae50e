/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cnf.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "query.hpp"
#include "rng.hpp"
#include "sat_backend.hpp"
#include "smt_backend.hpp"
#include "sound_bounds.hpp"
#include "xor_constraint.hpp"

namespace xmc {

struct run_config {
	double cl = 0.86;
	double alpha = 0.5;
	double thres = 1.7;
	bool sound = false;
	std::uint64_t seed = 1;
	int n_particles = 500;
	prior_spec prior{};
	int max_iterations = 100;
	std::uint64_t exhaust_cap = 1ull << 20; // safety cap on any single enumeration
	std::uint64_t solver_conflict_budget = 0; // embedded CNF solver effort per call, 0 = none
	std::ostream* verbose = nullptr;

	void validate() const
	{
		if (!(cl > 0.0 && cl < 1.0))
			throw input_error("confidence level must be in (0, 1)");
		if (!(alpha >= 0.0 && alpha < 1.0))
			throw input_error("alpha must be in [0, 1)");
		if (!(thres >= 0.0))
			throw input_error("threshold must be nonnegative");
		if (n_particles < 2)
			throw input_error("need at least 2 particles");
		if (max_iterations < 1)
			throw input_error("need at least 1 iteration");
		if (exhaust_cap < 1)
			throw input_error("enumeration safety cap must be at least 1");
	}
};

/*! Confidence-level adjustment compensating for the approximate survival
 *  model: cl + (1 - cl) * alpha. alpha = 0 leaves cl unchanged. */
inline double adjust_cl(double cl, double alpha)
{
	return cl + (1.0 - cl) * alpha;
}

enum class count_status { interval, exact, aborted };

inline char const* to_string(count_status s)
{
	switch (s) {
	case count_status::interval:
		return "interval";
	case count_status::exact:
		return "exact";
	case count_status::aborted:
		return "aborted";
	}
	return "?";
}

namespace detail {

inline std::string fmt_shortest(double v)
{
	char buf[64];
	auto const res = std::to_chars(buf, buf + sizeof buf, v);
	return std::string(buf, res.ptr);
}

inline std::string fmt_fixed6(double v)
{
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.6f", v);
	return buf;
}

inline std::string json_opt(std::optional<double> const& v)
{
	return v ? fmt_shortest(*v) : "null";
}

} // namespace detail

struct count_report {
	count_status status = count_status::aborted;
	std::optional<double> lower, upper, mean; // bits; absent for an empty exact count
	double sigma = 0;
	std::optional<std::uint64_t> exact_count;
	std::optional<double> sound_lower, sound_upper;
	std::optional<double> sound_confidence;
	int iterations = 0;
	std::uint64_t total_queries = 0;
	double wall_time_ms = 0;
	std::uint64_t seed = 0;

	std::string to_text() const
	{
		std::string s;
		if (status == count_status::exact) {
			s += "Exact count: " + std::to_string(*exact_count);
			s += *exact_count == 0 ? " (empty)\n"
			                       : " (" + detail::fmt_fixed6(*mean) + " bits)\n";
		} else if (lower) {
			s += "Lower: " + detail::fmt_fixed6(*lower) + "\n";
			s += "Upper: " + detail::fmt_fixed6(*upper) + "\n";
			s += "Mean: " + detail::fmt_fixed6(*mean) + "\n";
			s += "Sigma: " + detail::fmt_fixed6(sigma) + "\n";
		}
		if (sound_lower) {
			s += "Sound lower: " + detail::fmt_fixed6(*sound_lower) + "\n";
			s += "Sound upper: "
			     + (sound_upper ? detail::fmt_fixed6(*sound_upper) : std::string("none")) + "\n";
			s += "Sound confidence: " + detail::fmt_fixed6(*sound_confidence) + "\n";
		}
		s += "Status: " + std::string(to_string(status)) + "\n";
		s += "Iterations: " + std::to_string(iterations) + "\n";
		s += "Queries: " + std::to_string(total_queries) + "\n";
		s += "Seed: " + std::to_string(seed) + "\n";
		s += "Time: " + detail::fmt_fixed6(wall_time_ms) + " ms\n";
		return s;
	}

	std::string to_json() const
	{
		std::string s = "{";
		s += "\"status\":\"" + std::string(to_string(status)) + "\",";
		s += "\"lower\":" + detail::json_opt(lower) + ",";
		s += "\"upper\":" + detail::json_opt(upper) + ",";
		s += "\"mean\":" + detail::json_opt(mean) + ",";
		s += "\"sigma\":" + detail::fmt_shortest(sigma) + ",";
		s += "\"exact_count\":"
		     + (exact_count ? std::to_string(*exact_count) : std::string("null")) + ",";
		s += "\"sound_lower\":" + detail::json_opt(sound_lower) + ",";
		s += "\"sound_upper\":" + detail::json_opt(sound_upper) + ",";
		s += "\"sound_confidence\":" + detail::json_opt(sound_confidence) + ",";
		s += "\"iterations\":" + std::to_string(iterations) + ",";
		s += "\"total_queries\":" + std::to_string(total_queries) + ",";
		s += "\"seed\":" + std::to_string(seed) + ",";
		s += "\"wall_time_ms\":" + detail::fmt_shortest(wall_time_ms);
		s += "}";
		return s;
	}
};

/*! Degenerate-update retry policy: drop one constraint and double the cap,
 *  keeping the prior untouched. */
inline query_plan recover_degenerate(query_plan const& last, std::uint64_t safety_cap)
{
	query_plan next;
	next.k = last.k > 0 ? last.k - 1 : 0;
	next.c = last.c >= safety_cap / 2 ? safety_cap : last.c * 2;
	return next;
}

/*! \brief The adaptive counting loop, generic over the query back-end.
 *
 * Engine contract: outcome = engine(xors, cap) runs one exhaust-up-to-cap
 * query against a fresh streamlined instance.
 *
 * Each iteration plans (k, c) from the prior, draws k fresh parity
 * constraints, queries, and refines the particle posterior. k = 0 with an
 * unsaturated enumeration is an exact count and ends the run. Otherwise the
 * run ends once the operative interval (particle interval, or the sound
 * interval when sound bounds were requested) is no wider than thres, or when
 * the iteration cap is hit (status = aborted, best-so-far bounds).
 */
template <typename Engine>
count_report run_count_core(double width, std::vector<int> const& counted_ids, Engine&& engine,
                            run_config const& cfg)
{
	cfg.validate();
	if (width < 1 || counted_ids.empty())
		throw input_error("nothing to count: empty projection");

	auto const t0 = std::chrono::steady_clock::now();
	random_source rng(cfg.seed);
	auto& xor_stream = rng.stream("xor-draws");

	count_report rep;
	rep.seed = cfg.seed;
	double const cl = adjust_cl(cfg.cl, cfg.alpha);
	particle_set prior = make_prior(cfg.prior, width, cfg.n_particles, rng.stream("prior"));

	std::optional<query_plan> retry_plan;
	int consecutive_degenerate = 0;
	std::optional<bounds_estimate> last_bounds;
	std::optional<sound_bounds_result> last_sound;

	for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
		rep.iterations = iter;
		query_plan plan = retry_plan ? *retry_plan : compute_c_and_k(prior, width);
		retry_plan.reset();
		if (double(plan.k) > width)
			throw std::logic_error("planned more parity constraints than output bits");

		query_plan effective = plan;
		effective.c = std::min(plan.c, cfg.exhaust_cap);

		std::vector<xor_constraint> xors;
		xors.reserve(effective.k);
		for (int i = 0; i < effective.k; ++i)
			xors.push_back(draw_xor(counted_ids, xor_stream));

		query_outcome const out = engine(xors, effective.c);
		rep.total_queries += out.saturated ? out.n_sat : out.n_sat + 1;

		if (cfg.verbose)
			*cfg.verbose << "iter " << iter << ": k=" << effective.k << " c=" << effective.c
			             << " nSat=" << out.n_sat << (out.saturated ? " (saturated)" : "")
			             << '\n';

		if (effective.k == 0 && !out.saturated) {
			rep.status = count_status::exact;
			rep.exact_count = out.n_sat;
			rep.sigma = 0;
			if (out.n_sat > 0) {
				double const bits = std::log2(double(out.n_sat));
				rep.lower = rep.upper = rep.mean = bits;
			}
			break;
		}

		auto upd = update(prior, effective, out, cl, rng);
		if (!upd) {
			if (++consecutive_degenerate >= 3) {
				prior = make_prior(cfg.prior, width, cfg.n_particles, rng.stream("prior"));
				consecutive_degenerate = 0;
			} else {
				retry_plan = recover_degenerate(effective, cfg.exhaust_cap);
			}
			if (cfg.verbose)
				*cfg.verbose << "iter " << iter << ": degenerate update, retrying\n";
			continue;
		}
		consecutive_degenerate = 0;
		prior = std::move(upd->posterior);
		last_bounds = upd->bounds;

		std::optional<sound_bounds_result> sound_now;
		if (cfg.sound) {
			sound_now = sound_bounds(effective.k, effective.c, out.n_sat, out.saturated, width);
			if (sound_now) {
				last_sound = sound_now;
				if (cfg.verbose) {
					*cfg.verbose << "iter " << iter << ": sound [" << sound_now->lower << ", ";
					if (sound_now->upper)
						*cfg.verbose << *sound_now->upper;
					else
						*cfg.verbose << "none";
					*cfg.verbose << "]\n";
				}
			}
		}

		double const delta = upd->bounds.upper - upd->bounds.lower;
		if (cfg.verbose)
			*cfg.verbose << "iter " << iter << ": bounds [" << upd->bounds.lower << ", "
			             << upd->bounds.upper << "] mean " << upd->bounds.mean << '\n';

		double stop_delta = delta;
		if (cfg.sound)
			stop_delta = (sound_now && sound_now->upper)
			                 ? *sound_now->upper - sound_now->lower
			                 : std::numeric_limits<double>::infinity();
		if (stop_delta <= cfg.thres) {
			rep.status = count_status::interval;
			break;
		}
	}

	if (rep.status != count_status::exact && last_bounds) {
		rep.lower = last_bounds->lower;
		rep.upper = last_bounds->upper;
		rep.mean = last_bounds->mean;
		rep.sigma = last_bounds->sigma;
	}
	if (cfg.sound && last_sound) {
		rep.sound_lower = last_sound->lower;
		rep.sound_upper = last_sound->upper;
		rep.sound_confidence = last_sound->confidence;
	}

	rep.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now()
	                                                             - t0)
	                       .count();
	return rep;
}

/*! Count projected models of a CNF formula. */
inline count_report run_count(cnf_formula const& f, run_config const& cfg)
{
	auto engine = [&](std::vector<xor_constraint> const& xors, std::uint64_t cap) {
		solver_session session(f);
		if (cfg.solver_conflict_budget)
			session.set_conflict_budget(cfg.solver_conflict_budget);
		return exhaust_up_to_c(session, xors, cap);
	};
	return run_count_core(double(f.width()), f.projection, engine, cfg);
}

/*! Count distinct values of the designated output of an SMT problem. */
inline count_report run_count(smt_problem const& problem, solver_process_config const& solver,
                              run_config const& cfg)
{
	std::vector<int> bit_ids(problem.output_width);
	std::iota(bit_ids.begin(), bit_ids.end(), 0);
	auto engine = [&](std::vector<xor_constraint> const& xors, std::uint64_t cap) {
		smt_session session(problem, solver);
		return session.exhaust_up_to_c(xors, cap);
	};
	return run_count_core(double(problem.output_width), bit_ids, engine, cfg);
}

struct calibration_row {
	std::uint64_t seed = 0;
	count_report report;
	bool covered = false;
	double width = 0;
};

struct calibration_result {
	std::uint64_t true_count = 0;
	int runs = 0;
	std::vector<calibration_row> rows;
	double coverage = 0;
	double mean_width = 0;
	double mean_queries = 0;
	double median_queries = 0;

	std::string to_text() const
	{
		int covered = 0;
		for (auto const& r : rows)
			covered += r.covered;
		std::string s;
		s += "Runs: " + std::to_string(runs) + "\n";
		s += "True count: " + std::to_string(true_count) + "\n";
		s += "True influence: "
		     + (true_count ? detail::fmt_fixed6(std::log2(double(true_count)))
		                   : std::string("empty"))
		     + "\n";
		s += "Coverage: " + detail::fmt_fixed6(coverage) + " (" + std::to_string(covered) + "/"
		     + std::to_string(runs) + ")\n";
		s += "Mean interval width: " + detail::fmt_fixed6(mean_width) + "\n";
		s += "Mean queries: " + detail::fmt_fixed6(mean_queries) + "\n";
		s += "Median queries: " + detail::fmt_fixed6(median_queries) + "\n";
		return s;
	}

	std::string to_json() const
	{
		std::string s = "{";
		s += "\"runs\":" + std::to_string(runs) + ",";
		s += "\"true_count\":" + std::to_string(true_count) + ",";
		s += "\"coverage\":" + detail::fmt_shortest(coverage) + ",";
		s += "\"mean_width\":" + detail::fmt_shortest(mean_width) + ",";
		s += "\"mean_queries\":" + detail::fmt_shortest(mean_queries) + ",";
		s += "\"median_queries\":" + detail::fmt_shortest(median_queries) + ",";
		s += "\"rows\":[";
		for (std::size_t i = 0; i < rows.size(); ++i) {
			if (i)
				s += ",";
			s += "{\"seed\":" + std::to_string(rows[i].seed) + ",\"status\":\""
			     + to_string(rows[i].report.status) + "\",\"lower\":"
			     + detail::json_opt(rows[i].report.lower) + ",\"upper\":"
			     + detail::json_opt(rows[i].report.upper) + ",\"covered\":"
			     + (rows[i].covered ? "true" : "false")
			     + ",\"queries\":" + std::to_string(rows[i].report.total_queries) + "}";
		}
		s += "]}";
		return s;
	}
};

namespace detail {

inline bool interval_covers(count_report const& rep, std::uint64_t true_count)
{
	if (rep.status == count_status::exact)
		return rep.exact_count && *rep.exact_count == true_count;
	if (!rep.lower || true_count == 0)
		return false;
	double const truth = std::log2(double(true_count));
	return *rep.lower - 1e-9 <= truth && truth <= *rep.upper + 1e-9;
}

} // namespace detail

/*! \brief Coverage study: many seeded runs against a formula whose exact
 *  count is known.
 *
 * Run i uses seed base.seed + i. Runs are independent, so they may execute on
 * several threads; rows are stored by run index, which makes the result
 * identical regardless of the job count.
 */
inline calibration_result calibrate(cnf_formula const& f, std::uint64_t true_count,
                                    run_config const& base, int runs, int jobs = 1)
{
	if (runs < 1)
		throw input_error("need at least 1 calibration run");
	calibration_result res;
	res.true_count = true_count;
	res.runs = runs;
	res.rows.resize(runs);

	auto run_one = [&](int i) {
		run_config cfg = base;
		cfg.seed = base.seed + std::uint64_t(i);
		cfg.verbose = nullptr;
		calibration_row row;
		row.seed = cfg.seed;
		row.report = run_count(f, cfg);
		row.covered = detail::interval_covers(row.report, true_count);
		row.width = (row.report.status == count_status::exact)
		                ? 0.0
		                : (row.report.lower ? *row.report.upper - *row.report.lower
		                                    : double(f.width()));
		res.rows[i] = std::move(row);
	};

	if (jobs <= 1) {
		for (int i = 0; i < runs; ++i)
			run_one(i);
	} else {
		std::atomic<int> next{0};
		auto worker = [&] {
			for (;;) {
				int const i = next.fetch_add(1);
				if (i >= runs)
					return;
				run_one(i);
			}
		};
		std::vector<std::thread> pool;
		for (int t = 0; t < jobs; ++t)
			pool.emplace_back(worker);
		for (auto& th : pool)
			th.join();
	}

	int covered = 0;
	double width_sum = 0, query_sum = 0;
	std::vector<std::uint64_t> queries;
	for (auto const& r : res.rows) {
		covered += r.covered;
		width_sum += r.width;
		query_sum += double(r.report.total_queries);
		queries.push_back(r.report.total_queries);
	}
	std::sort(queries.begin(), queries.end());
	res.coverage = double(covered) / runs;
	res.mean_width = width_sum / runs;
	res.mean_queries = query_sum / runs;
	res.median_queries = runs % 2 ? double(queries[runs / 2])
	                              : 0.5 * double(queries[runs / 2 - 1] + queries[runs / 2]);
	return res;
}

} // namespace xmc
