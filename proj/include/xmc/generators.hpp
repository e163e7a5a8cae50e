/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "cnf.hpp"
#include "rng.hpp"

namespace xmc {

/*! Serialize with `c ind` projection lines (omitted when the projection is
 *  all variables). */
inline void write_dimacs(std::ostream& out, cnf_formula const& f)
{
	out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
	if (static_cast<int>(f.projection.size()) != f.num_vars) {
		out << "c ind";
		for (int v : f.projection)
			out << ' ' << v;
		out << " 0\n";
	}
	for (auto const& cl : f.clauses) {
		for (int lit : cl)
			out << lit << ' ';
		out << "0\n";
	}
}

namespace detail {

/*! Assert XOR(vars) = rhs with direct clauses (2^(|vars|-1) of them, no
 *  auxiliaries), so the formula stays within reach of the exhaustive oracle. */
inline void add_parity_clauses(std::vector<clause>& clauses, std::vector<int> const& vars,
                               bool rhs)
{
	std::size_t const m = vars.size();
	for (std::uint64_t a = 0; a < (1ull << m); ++a) {
		bool parity = false;
		for (std::size_t i = 0; i < m; ++i)
			parity ^= ((a >> i) & 1) != 0;
		if (parity == rhs)
			continue; // satisfying assignment, nothing to forbid
		clause cl;
		cl.reserve(m);
		for (std::size_t i = 0; i < m; ++i)
			cl.push_back(((a >> i) & 1) ? -vars[i] : vars[i]);
		clauses.push_back(std::move(cl));
	}
}

} // namespace detail

/*! \brief Formula with exactly 2^free_bits projected models over `width`
 *  projected variables.
 *
 * Variables 1..free_bits are unconstrained; every further bit is pinned to
 * the parity of a small random subset of the free bits (possibly negated).
 * All parity constraints use direct clauses, so the whole formula has only
 * `width` variables and stays exhaustively countable.
 */
inline cnf_formula planted_formula(int width, int free_bits, random_stream& rs)
{
	if (free_bits < 1 || free_bits > width)
		throw input_error("planted formula needs 1 <= free_bits <= width");

	cnf_formula f;
	f.num_vars = width;
	f.projection.resize(width);
	std::iota(f.projection.begin(), f.projection.end(), 1);

	for (int j = free_bits + 1; j <= width; ++j) {
		std::vector<int> support;
		for (int v = 1; v <= free_bits; ++v)
			if (rs.next_bit())
				support.push_back(v);
		if (support.empty())
			support.push_back(1);
		if (support.size() > 5)
			support.resize(5); // keeps the direct encoding small
		bool const negate = rs.next_bit();

		std::vector<int> vars = support;
		vars.push_back(j); // XOR(support) ^ x_j = negate  <=>  x_j = XOR(support) ^ negate
		detail::add_parity_clauses(f.clauses, vars, negate);
	}
	return f;
}

/*! Random CNF with clause lengths in [2, 4] and a random projection. May be
 *  satisfiable or not; exact counts come from the oracle. */
inline cnf_formula random_cnf(int num_vars, int num_clauses, int projection_size,
                              random_stream& rs)
{
	if (num_vars < 2 || projection_size < 1 || projection_size > num_vars)
		throw input_error("bad random formula shape");

	cnf_formula f;
	f.num_vars = num_vars;
	for (int i = 0; i < num_clauses; ++i) {
		int const len = 2 + int(rs.next_u64() % 3);
		clause cl;
		while (static_cast<int>(cl.size()) < std::min(len, num_vars)) {
			int const v = 1 + int(rs.next_u64() % num_vars);
			bool dup = false;
			for (int lit : cl)
				if (lit == v || lit == -v)
					dup = true;
			if (!dup)
				cl.push_back(rs.next_bit() ? v : -v);
		}
		f.clauses.push_back(std::move(cl));
	}

	std::vector<int> vars(num_vars);
	std::iota(vars.begin(), vars.end(), 1);
	for (int i = num_vars - 1; i > 0; --i)
		std::swap(vars[i], vars[rs.next_u64() % (i + 1)]);
	vars.resize(projection_size);
	std::sort(vars.begin(), vars.end());
	f.projection = std::move(vars);
	return f;
}

} // namespace xmc
