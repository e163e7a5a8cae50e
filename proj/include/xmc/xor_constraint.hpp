/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <vector>

#include "cnf.hpp"

namespace xmc {

/*! \brief A random parity constraint over counted variables.
 *
 * `parity == true` requires the XOR of the listed variables to equal 1.
 * An empty constraint with parity 1 is unsatisfiable (XOR over nothing is 0);
 * with parity 0 it is vacuously true.
 */
struct xor_constraint {
	std::vector<int> vars; // sorted variable identifiers (or bit indices in SMT mode)
	bool parity = false;

	/*! Evaluate against an assignment given as a predicate var -> bool. */
	template <typename ValueOf>
	bool satisfied_by(ValueOf&& value_of) const
	{
		bool acc = false;
		for (int v : vars)
			acc ^= static_cast<bool>(value_of(v));
		return acc == parity;
	}

	friend bool operator==(xor_constraint const& a, xor_constraint const& b) = default;
};

/*! \brief Draw one constraint from the counting hash family.
 *
 * Each projection variable is included independently with probability 1/2 and
 * the parity bit is an independent fair coin. Exactly |projection| + 1 bits
 * are consumed, in projection order, so draws are reproducible bit-for-bit.
 */
template <typename BitSource>
xor_constraint draw_xor(std::vector<int> const& projection, BitSource& bits)
{
	xor_constraint x;
	for (int v : projection)
		if (bits.next_bit())
			x.vars.push_back(v);
	x.parity = bits.next_bit();
	return x;
}

struct xor_encoding {
	std::vector<clause> clauses;
	int next_free_var;     // first variable still unused after encoding
	int aux_vars_added = 0;
};

namespace detail {

/*! Clauses for t <-> a XOR b (fresh t). */
inline void tseitin_xor2(std::vector<clause>& out, int a, int b, int t)
{
	out.push_back({-a, -b, -t});
	out.push_back({a, b, -t});
	out.push_back({a, -b, t});
	out.push_back({-a, b, t});
}

/*! Clauses asserting a XOR b = rhs directly (no auxiliary). */
inline void xor2_equals(std::vector<clause>& out, int a, int b, bool rhs)
{
	if (rhs) {
		out.push_back({a, b});
		out.push_back({-a, -b});
	} else {
		out.push_back({a, -b});
		out.push_back({-a, b});
	}
}

} // namespace detail

/*! \brief Parity-chain CNF encoding of an XOR constraint.
 *
 * For m = |vars| the encoding introduces max(0, m-2) auxiliary variables:
 * a chain t2 = v1^v2, t3 = t2^v3, ... with the final pair asserted equal to
 * the parity. Auxiliaries are allocated from `next_free_var` upward and must
 * stay outside the projection. The empty unsatisfiable constraint becomes a
 * contradictory unit pair on one fresh variable.
 */
inline xor_encoding encode_xor_cnf(xor_constraint const& x, int next_free_var)
{
	xor_encoding enc;
	enc.next_free_var = next_free_var;
	std::size_t const m = x.vars.size();

	if (m == 0) {
		if (x.parity) {
			int const a = enc.next_free_var++;
			enc.aux_vars_added = 1;
			enc.clauses.push_back({a});
			enc.clauses.push_back({-a});
		}
		return enc;
	}
	if (m == 1) {
		enc.clauses.push_back({x.parity ? x.vars[0] : -x.vars[0]});
		return enc;
	}
	if (m == 2) {
		detail::xor2_equals(enc.clauses, x.vars[0], x.vars[1], x.parity);
		return enc;
	}

	int prev = enc.next_free_var++;
	++enc.aux_vars_added;
	detail::tseitin_xor2(enc.clauses, x.vars[0], x.vars[1], prev);
	for (std::size_t i = 2; i + 1 < m; ++i) {
		int const t = enc.next_free_var++;
		++enc.aux_vars_added;
		detail::tseitin_xor2(enc.clauses, prev, x.vars[i], t);
		prev = t;
	}
	detail::xor2_equals(enc.clauses, prev, x.vars[m - 1], x.parity);
	return enc;
}

} // namespace xmc
