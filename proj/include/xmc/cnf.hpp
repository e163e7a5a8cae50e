/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <algorithm>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace xmc {

/*! A clause is a list of nonzero DIMACS-style literals (positive = variable,
 *  negative = negated variable). */
using clause = std::vector<int>;

/*! \brief CNF clause database with a projection scope.
 *
 * The projection (sorted, duplicate-free) lists the variables over which
 * distinct solutions are counted; every other variable is existential.
 */
struct cnf_formula {
	int num_vars = 0;
	std::vector<clause> clauses;
	std::vector<int> projection;

	int width() const { return static_cast<int>(projection.size()); }
};

/*! \brief Parse DIMACS CNF with optional `c ind v1 v2 ... 0` projection lines.
 *
 * Multiple `c ind` lines are unioned. Without any, the projection defaults to
 * all variables. Clauses may span lines; a line starting with `%` ends the
 * input (a common benchmark convention).
 */
inline cnf_formula parse_dimacs(std::istream& in)
{
	cnf_formula f;
	bool have_header = false;
	long declared_clauses = 0;
	std::vector<int> ind_vars;
	std::vector<std::pair<unsigned, int>> pending_ind; // (line, var) checked once header is known
	clause current;
	bool in_clause = false;
	unsigned line_no = 0;

	std::string line;
	while (std::getline(in, line)) {
		++line_no;
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		if (line.empty())
			continue;
		if (line[0] == '%')
			break;

		std::istringstream ls(line);
		std::string tok;
		if (!(ls >> tok))
			continue;

		if (tok == "c") {
			std::string kind;
			if ((ls >> kind) && kind == "ind") {
				bool terminated = false;
				long v;
				while (ls >> v) {
					if (v == 0) {
						terminated = true;
						break;
					}
					if (v < 0)
						throw parse_error(line_no, "negative variable in ind line");
					pending_ind.emplace_back(line_no, static_cast<int>(v));
				}
				if (!terminated)
					throw parse_error(line_no, "ind line not terminated by 0");
			}
			continue; // any other comment is ignored
		}

		if (tok == "p") {
			if (have_header)
				throw parse_error(line_no, "duplicate header");
			std::string fmt;
			long nv = -1, nc = -1;
			if (!(ls >> fmt >> nv >> nc) || fmt != "cnf" || nv < 0 || nc < 0)
				throw parse_error(line_no, "malformed header, expected 'p cnf <vars> <clauses>'");
			if (nv == 0)
				throw parse_error(line_no, "empty formula (zero variables)");
			have_header = true;
			f.num_vars = static_cast<int>(nv);
			declared_clauses = nc;
			continue;
		}

		// clause data
		if (!have_header)
			throw parse_error(line_no, "clause data before header");
		ls.clear();
		ls.str(line);
		long lit;
		while (ls >> lit) {
			if (lit == 0) {
				if (current.empty())
					throw parse_error(line_no, "empty clause");
				f.clauses.push_back(current);
				current.clear();
				in_clause = false;
				continue;
			}
			long const v = lit < 0 ? -lit : lit;
			if (v > f.num_vars)
				throw parse_error(line_no, "literal out of range");
			current.push_back(static_cast<int>(lit));
			in_clause = true;
		}
		if (ls.fail() && !ls.eof())
			throw parse_error(line_no, "invalid token in clause data");
	}

	if (!have_header)
		throw parse_error(line_no, "missing header");
	if (in_clause)
		throw parse_error(line_no, "unterminated clause at end of input");
	if (static_cast<long>(f.clauses.size()) != declared_clauses)
		throw parse_error(line_no, "clause count mismatch: header declares "
		                               + std::to_string(declared_clauses) + ", found "
		                               + std::to_string(f.clauses.size()));

	for (auto [ln, v] : pending_ind) {
		if (v > f.num_vars)
			throw parse_error(ln, "ind variable out of range");
		ind_vars.push_back(v);
	}
	if (ind_vars.empty()) {
		f.projection.resize(f.num_vars);
		std::iota(f.projection.begin(), f.projection.end(), 1);
	} else {
		std::sort(ind_vars.begin(), ind_vars.end());
		ind_vars.erase(std::unique(ind_vars.begin(), ind_vars.end()), ind_vars.end());
		f.projection = std::move(ind_vars);
	}
	return f;
}

inline cnf_formula parse_dimacs(std::string_view text)
{
	std::istringstream in{std::string(text)};
	return parse_dimacs(in);
}

} // namespace xmc
