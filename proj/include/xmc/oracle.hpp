/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "cnf.hpp"
#include "xor_constraint.hpp"

namespace xmc::oracle {

/*! Exact probability with a power-of-two denominator. */
struct rational {
	std::uint64_t num = 0;
	std::uint64_t den = 1;

	friend bool operator==(rational const& a, rational const& b)
	{
		return static_cast<unsigned __int128>(a.num) * b.den
		       == static_cast<unsigned __int128>(b.num) * a.den;
	}

	double to_double() const { return double(num) / double(den); }
};

struct exact_count_result {
	std::uint64_t count = 0;
	std::vector<std::uint64_t> values; // packed projected assignments, ascending
};

/*! \brief Exact projected model count by exhaustive truth-table enumeration.
 *
 * Deliberately ignorant of the solving pipeline: every assignment of every
 * variable is evaluated against the clause list directly. Bit j of a packed
 * value is the value of projection[j]. Requires 2^|projection| <= limit and
 * a total variable count small enough to enumerate.
 */
inline exact_count_result exact_count(cnf_formula const& f, std::uint64_t limit = 1ull << 20,
                                      bool keep_values = true)
{
	if (f.num_vars > 26)
		throw input_error("formula too large for the exhaustive oracle");
	if (f.projection.empty() || (1ull << f.projection.size()) > limit)
		throw input_error("projection too large for the exhaustive oracle limit");

	std::size_t const w = f.projection.size();
	std::vector<bool> seen(1ull << w, false);

	std::uint64_t const total = 1ull << f.num_vars;
	for (std::uint64_t a = 0; a < total; ++a) {
		bool model = true;
		for (auto const& cl : f.clauses) {
			bool sat = false;
			for (int lit : cl) {
				int const v = lit > 0 ? lit : -lit;
				bool const val = (a >> (v - 1)) & 1;
				if (val == (lit > 0)) {
					sat = true;
					break;
				}
			}
			if (!sat) {
				model = false;
				break;
			}
		}
		if (!model)
			continue;
		std::uint64_t packed = 0;
		for (std::size_t j = 0; j < w; ++j)
			packed |= std::uint64_t((a >> (f.projection[j] - 1)) & 1) << j;
		seen[packed] = true;
	}

	exact_count_result res;
	for (std::uint64_t v = 0; v < seen.size(); ++v)
		if (seen[v]) {
			++res.count;
			if (keep_values)
				res.values.push_back(v);
		}
	return res;
}

/*! Number of packed values satisfying every given parity constraint.
 *  Constraint variables are bit positions: variable v means bit (v-1) when
 *  positions are 1-based CNF identifiers over projection {1..w}. */
inline std::uint64_t count_survivors(std::vector<std::uint64_t> const& values,
                                     std::vector<std::uint64_t> const& masks,
                                     std::vector<bool> const& parities)
{
	std::uint64_t n = 0;
	for (std::uint64_t v : values) {
		bool alive = true;
		for (std::size_t i = 0; i < masks.size(); ++i) {
			if ((std::popcount(v & masks[i]) & 1) != int(parities[i])) {
				alive = false;
				break;
			}
		}
		if (alive)
			++n;
	}
	return n;
}

/*! Convenience overload taking xor_constraints over 1-based variables 1..w. */
inline std::uint64_t count_survivors(std::vector<std::uint64_t> const& values,
                                     std::vector<xor_constraint> const& xors)
{
	std::vector<std::uint64_t> masks;
	std::vector<bool> parities;
	for (auto const& x : xors) {
		std::uint64_t mask = 0;
		for (int v : x.vars)
			mask |= 1ull << (v - 1);
		masks.push_back(mask);
		parities.push_back(x.parity);
	}
	return count_survivors(values, masks, parities);
}

struct survival_distribution {
	std::vector<rational> prob; // index n = 0 .. |model set|
	std::uint64_t draws = 0;

	rational mean() const
	{
		std::uint64_t num = 0;
		for (std::size_t n = 0; n < prob.size(); ++n)
			num += n * prob[n].num;
		return {num, draws};
	}
};

/*! \brief Exact distribution of the streamlined count over the full XOR draw
 *  space.
 *
 * Enumerates every k-tuple of constraints from the family (2^(w+1) equally
 * likely draws per constraint: any subset of the w bits plus a parity bit)
 * and tallies how many of the model set's values satisfy all of them.
 * Probabilities are exact rationals. Only practical for w <= 3 and k <= 2.
 */
inline survival_distribution xor_survival_distribution(std::vector<std::uint64_t> const& model_set,
                                                       int width, int k)
{
	if (width < 1 || width > 3 || k < 0 || k > 2)
		throw input_error("draw space too large for exhaustive enumeration");

	std::uint64_t const per_constraint = 1ull << (width + 1); // mask bits + parity bit
	std::uint64_t draws = 1;
	for (int i = 0; i < k; ++i)
		draws *= per_constraint;

	survival_distribution dist;
	dist.draws = draws;
	dist.prob.assign(model_set.size() + 1, rational{0, draws});

	std::vector<std::uint64_t> masks(k);
	std::vector<bool> parities(k);
	for (std::uint64_t tuple = 0; tuple < draws; ++tuple) {
		std::uint64_t t = tuple;
		for (int i = 0; i < k; ++i) {
			std::uint64_t const digit = t % per_constraint;
			t /= per_constraint;
			masks[i] = digit >> 1;
			parities[i] = digit & 1;
		}
		++dist.prob[count_survivors(model_set, masks, parities)].num;
	}
	return dist;
}

} // namespace xmc::oracle
