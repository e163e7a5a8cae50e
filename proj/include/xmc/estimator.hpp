/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "query.hpp"
#include "rng.hpp"

namespace xmc {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

namespace detail {

inline constexpr double ln2 = 0.6931471805599453094172321214581766;

/*! Thread-safe log-gamma: plain lgamma writes the global signgam, which races
 *  when calibration runs on several threads. Arguments here are positive, so
 *  the sign output is discarded. */
inline double log_gamma(double v)
{
#if defined(__unix__) || defined(__APPLE__)
	int sign = 0;
	return ::lgamma_r(v, &sign);
#else
	return std::lgamma(v);
#endif
}

/*! log(1 - 2^-k) for k >= 1. */
inline double log1m_exp2_neg(int k) { return std::log1p(-std::exp2(-double(k))); }

/*! \brief Natural-log survival-model weight: log Pr[exactly n of N = 2^x
 *  solutions remain after k independent halvings].
 *
 * Three regimes. Small N evaluates the gamma-extended binomial directly.
 * Mid-range N switches to the product form of the falling factorial: the
 * lgamma difference loses all precision once lgamma(N) outgrows the 2^52
 * mantissa. Past x = 900, N itself overflows and N >> n is certain, so
 * log C(N,n) ~ n x ln2 and (N-n) log(1-q) ~ -N g + n g with g = -log(1-2^-k).
 */
inline double log_prob_exact_bits(double x_bits, int k, std::uint64_t n)
{
	if (k == 0) {
		// (1-q)^(N-n) collapses to [N == n]
		double const n_total = std::exp2(x_bits);
		return std::abs(n_total - double(n)) <= 1e-9 ? 0.0 : neg_inf;
	}
	double const log1mq = log1m_exp2_neg(k);
	if (x_bits > 900.0) {
		double const g = -log1mq;
		double const n_total_g = std::exp2(x_bits + std::log2(g)); // N*g, may overflow to inf
		return double(n) * (x_bits * ln2 - k * ln2 + g) - detail::log_gamma(double(n) + 1.0)
		       - n_total_g;
	}
	double const n_total = std::exp2(x_bits);
	if (n_total < double(n))
		return neg_inf;
	double lp = (n_total - double(n)) * log1mq - double(n) * k * ln2;
	if (x_bits <= 20.0) {
		lp += detail::log_gamma(n_total + 1.0) - detail::log_gamma(double(n) + 1.0)
		      - detail::log_gamma(n_total - double(n) + 1.0);
	} else {
		for (std::uint64_t i = 1; i <= n; ++i)
			lp += std::log(n_total - double(n) + double(i)) - std::log(double(i));
	}
	return lp;
}

/*! Tail weight log Pr[n or more remain], via the term recurrence
 *  t(i+1)/t(i) = (N-i)/(i+1) * q/(1-q) and a running log-sum-exp of the
 *  complementary lower tail. */
inline double log_prob_at_least_bits(double x_bits, int k, std::uint64_t n)
{
	if (n == 0)
		return 0.0;
	if (k == 0)
		return std::exp2(x_bits) >= double(n) - 1e-9 ? 0.0 : neg_inf;

	bool const huge = x_bits > 900.0;
	double const n_total = huge ? 0.0 : std::exp2(x_bits);
	if (!huge && n_total + 1e-9 < double(n))
		return neg_inf; // more survivors than solutions: certain impossibility
	double const log1mq = log1m_exp2_neg(k);
	double const log_ratio_q = -double(k) * ln2 - log1mq; // log(q / (1-q))

	double lt = huge ? -std::exp2(x_bits + std::log2(-log1mq)) : n_total * log1mq;
	double max_lp = lt;
	double scaled_sum = 1.0; // the i = 0 term
	for (std::uint64_t i = 0; i + 1 < n; ++i) {
		if (!huge && double(i) >= n_total)
			break; // remaining terms are zero
		double const log_n_minus_i = huge ? x_bits * ln2 : std::log(n_total - double(i));
		lt += log_n_minus_i - std::log(double(i + 1)) + log_ratio_q;
		if (lt > max_lp) {
			scaled_sum = scaled_sum * std::exp(max_lp - lt) + 1.0;
			max_lp = lt;
		} else {
			scaled_sum += std::exp(lt - max_lp);
		}
	}
	if (max_lp == neg_inf)
		return 0.0; // lower tail carries no mass at all
	double const tail = std::exp(max_lp) * scaled_sum;
	if (tail >= 1.0)
		return neg_inf;
	return std::log1p(-tail);
}

} // namespace detail

/*! Pr[exactly n solutions remain] when N solutions each survive one of 2^k
 *  cells independently: C(N,n) (2^-k)^n (1-2^-k)^(N-n), gamma-extended to
 *  real N and computed in log space. */
inline double prob_exact(double n_total, int k, std::uint64_t n)
{
	if (n_total < 0 || k < 0)
		throw std::invalid_argument("prob_exact: negative input");
	if (n_total < double(n))
		return 0.0;
	if (k == 0)
		return std::abs(n_total - double(n)) <= 1e-9 ? 1.0 : 0.0;
	double lp = (n_total - double(n)) * detail::log1m_exp2_neg(k) - double(n) * k * detail::ln2;
	if (n_total <= 1048576.0) {
		lp += detail::log_gamma(n_total + 1.0) - detail::log_gamma(double(n) + 1.0)
		      - detail::log_gamma(n_total - double(n) + 1.0);
	} else {
		for (std::uint64_t i = 1; i <= n; ++i)
			lp += std::log(n_total - double(n) + double(i)) - std::log(double(i));
	}
	return std::clamp(std::exp(lp), 0.0, 1.0);
}

/*! Pr[n or more solutions remain] = 1 - sum_{i<n} prob_exact(N, k, i). */
inline double prob_at_least(double n_total, int k, std::uint64_t n)
{
	if (n == 0)
		return 1.0;
	if (k == 0)
		return n_total >= double(n) - 1e-9 ? 1.0 : 0.0;
	return std::clamp(std::exp(detail::log_prob_at_least_bits(std::log2(n_total), k, n)), 0.0,
	                  1.0);
}

struct particle {
	double x = 0; // influence hypothesis, bits
	double w = 0;
};

/*! Weighted samples representing the posterior over log2(model count). */
struct particle_set {
	double width = 0; // all influences lie in [0, width]
	std::vector<particle> particles;

	double total_weight() const
	{
		double s = 0;
		for (auto const& p : particles)
			s += p.w;
		return s;
	}

	void normalize()
	{
		double const s = total_weight();
		if (s <= 0)
			throw std::invalid_argument("particle set has no weight to normalize");
		for (auto& p : particles)
			p.w /= s;
	}

	double mean() const
	{
		double s = 0, sw = 0;
		for (auto const& p : particles) {
			s += p.w * p.x;
			sw += p.w;
		}
		return s / sw;
	}

	double stddev() const
	{
		double const mu = mean();
		double s = 0, sw = 0;
		for (auto const& p : particles) {
			s += p.w * (p.x - mu) * (p.x - mu);
			sw += p.w;
		}
		return std::sqrt(s / sw);
	}
};

struct bounds_estimate {
	double mean = 0;
	double sigma = 0;
	double lower = 0;
	double upper = 0;
	double confidence_level = 0;
};

struct prior_spec {
	enum class kind { uniform_width, uniform_64, custom_range };
	kind which = kind::uniform_64;
	double lo = 0;
	double hi = 0; // custom_range only
};

inline particle_set make_prior(prior_spec const& spec, double width, int n_particles,
                               random_stream& rs)
{
	double lo = 0, hi = width;
	switch (spec.which) {
	case prior_spec::kind::uniform_width:
		break;
	case prior_spec::kind::uniform_64:
		hi = std::min(64.0, width);
		break;
	case prior_spec::kind::custom_range:
		lo = spec.lo;
		hi = spec.hi;
		break;
	}
	if (lo > hi || lo < 0 || hi > width)
		throw input_error("prior range [" + std::to_string(lo) + ", " + std::to_string(hi)
		                  + "] is empty or outside [0, " + std::to_string(width) + "]");
	particle_set ps;
	ps.width = width;
	ps.particles.reserve(n_particles);
	double const w = 1.0 / n_particles;
	for (int i = 0; i < n_particles; ++i)
		ps.particles.push_back({lo == hi ? lo : rs.uniform(lo, hi), w});
	return ps;
}

/*! Smallest symmetric-about-the-mean interval holding at least cl of the
 *  posterior mass, with mass-preserving clamping at the domain edges. */
inline std::pair<double, double> confidence_interval(particle_set const& post, double cl)
{
	double const mu = post.mean();
	double const total = post.total_weight();

	std::vector<std::size_t> order(post.particles.size());
	std::iota(order.begin(), order.end(), 0);
	std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
		double const da = std::abs(post.particles[a].x - mu);
		double const db = std::abs(post.particles[b].x - mu);
		if (da != db)
			return da < db;
		return post.particles[a].x < post.particles[b].x;
	});

	double mass = 0, half = 0;
	for (std::size_t i : order) {
		mass += post.particles[i].w;
		half = std::max(half, std::abs(post.particles[i].x - mu));
		if (mass >= cl * total)
			break;
	}

	double lb = mu - half;
	double ub = mu + half;
	if (lb >= 0 && ub <= post.width)
		return {lb, ub};

	// clamp, widening the opposite side so the interval still covers cl mass
	std::vector<std::size_t> by_x(post.particles.size());
	std::iota(by_x.begin(), by_x.end(), 0);
	std::sort(by_x.begin(), by_x.end(),
	          [&](std::size_t a, std::size_t b) { return post.particles[a].x < post.particles[b].x; });
	if (lb < 0) {
		lb = 0;
		double acc = 0;
		ub = post.width;
		for (std::size_t i : by_x) {
			acc += post.particles[i].w;
			if (acc >= cl * total) {
				ub = std::max(mu, post.particles[i].x);
				break;
			}
		}
	} else { // ub > width
		ub = post.width;
		double acc = 0;
		lb = 0;
		for (auto it = by_x.rbegin(); it != by_x.rend(); ++it) {
			acc += post.particles[*it].w;
			if (acc >= cl * total) {
				lb = std::min(mu, post.particles[*it].x);
				break;
			}
		}
	}
	return {std::max(0.0, lb), std::min(post.width, ub)};
}

namespace detail {

/*! Low-variance systematic resampling: n equally spaced points in cumulative
 *  weight space, one shared uniform offset. Input order must be canonical
 *  (particles sorted by x) for reproducibility. */
inline std::vector<double> resample_systematic(std::vector<particle> const& weighted, int n,
                                               random_stream& rs)
{
	double const total = std::accumulate(weighted.begin(), weighted.end(), 0.0,
	                                     [](double s, particle const& p) { return s + p.w; });
	std::vector<double> out;
	out.reserve(n);
	double const step = total / n;
	double pos = rs.uniform() * step;
	double cum = 0;
	std::size_t i = 0;
	for (int j = 0; j < n; ++j) {
		double const target = pos + j * step;
		while (i < weighted.size() && cum + weighted[i].w < target) {
			cum += weighted[i].w;
			++i;
		}
		out.push_back(weighted[std::min(i, weighted.size() - 1)].x);
	}
	return out;
}

} // namespace detail

struct update_result {
	particle_set posterior;
	bounds_estimate bounds;
};

/*! \brief One Bayes step of the particle filter.
 *
 * Reweights every particle by the survival model's probability of the
 * observed outcome (exact count if the query finished, tail probability if it
 * saturated), then applies systematic resampling followed by a small additive
 * jitter, sd = max(0.02, 0.1 sigma) bits, to keep the support from
 * collapsing. Returns nullopt when every weight underflows to zero
 * (degenerate update: the observation is impossible under the prior).
 */
inline std::optional<update_result> update(particle_set const& prior, query_plan const& plan,
                                           query_outcome const& outcome, double cl,
                                           random_source& rng)
{
	if (prior.particles.empty())
		throw std::invalid_argument("empty prior");

	// canonical order makes the result invariant under prior permutation
	particle_set work = prior;
	std::sort(work.particles.begin(), work.particles.end(),
	          [](particle const& a, particle const& b) { return a.x < b.x; });

	std::vector<double> logw(work.particles.size());
	double max_lw = neg_inf;
	for (std::size_t i = 0; i < work.particles.size(); ++i) {
		double const lw = outcome.saturated
		                      ? detail::log_prob_at_least_bits(work.particles[i].x, plan.k,
		                                                       outcome.n_sat)
		                      : detail::log_prob_exact_bits(work.particles[i].x, plan.k,
		                                                    outcome.n_sat);
		logw[i] = lw;
		max_lw = std::max(max_lw, lw);
	}
	if (max_lw == neg_inf)
		return std::nullopt;

	for (std::size_t i = 0; i < work.particles.size(); ++i)
		work.particles[i].w *= std::exp(logw[i] - max_lw);
	double const total = work.total_weight();
	if (!(total > 0))
		return std::nullopt;
	for (auto& p : work.particles)
		p.w /= total;

	double const sigma_w = work.stddev();

	int const n = static_cast<int>(work.particles.size());
	auto xs = detail::resample_systematic(work.particles, n, rng.stream("resampling"));

	double const jitter_sd = std::max(0.02, 0.1 * sigma_w);
	auto& jitter = rng.stream("jitter");
	particle_set post;
	post.width = prior.width;
	post.particles.reserve(n);
	for (double x : xs) {
		double const jx = std::clamp(x + jitter.normal(0.0, jitter_sd), 0.0, prior.width);
		post.particles.push_back({jx, 1.0 / n});
	}

	update_result res;
	res.bounds.mean = post.mean();
	res.bounds.sigma = post.stddev();
	auto const [lb, ub] = confidence_interval(post, cl);
	res.bounds.lower = lb;
	res.bounds.upper = ub;
	res.bounds.confidence_level = cl;
	res.posterior = std::move(post);
	return res;
}

/*! \brief Choose the next query: enumeration cap from the prior's spread,
 *  constraint count from its mean.
 *
 * c = ceil(((2^sigma + 1) / (2^sigma - 1))^2), k = floor(mu - log2(c)/2).
 * k <= 0 switches to exact mode: no constraints, uncapped enumeration
 * (the driver narrows the sentinel to its safety cap).
 */
inline query_plan compute_c_and_k(double mu, double sigma, double /*width*/)
{
	double const s = std::max(sigma, 1e-6);
	double const ratio = (std::exp2(s) + 1.0) / (std::exp2(s) - 1.0);
	double const c_real = std::ceil(ratio * ratio);

	query_plan plan;
	if (c_real >= 9.2e18) { // beyond any finite cap we would ever enumerate
		plan.k = 0;
		plan.c = infinite_cap;
		return plan;
	}
	auto const c = static_cast<std::uint64_t>(c_real);
	int const k = static_cast<int>(std::floor(mu - 0.5 * std::log2(c_real)));
	if (k <= 0) {
		plan.k = 0;
		plan.c = infinite_cap;
	} else {
		plan.k = k;
		plan.c = c;
	}
	return plan;
}

inline query_plan compute_c_and_k(particle_set const& prior, double width)
{
	return compute_c_and_k(prior.mean(), prior.stddev(), width);
}

} // namespace xmc
