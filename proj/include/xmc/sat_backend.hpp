/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cnf.hpp"
#include "query.hpp"
#include "solver.hpp"
#include "xor_constraint.hpp"

namespace xmc {

class solver_error : public std::runtime_error {
public:
	solver_error(std::string const& msg, std::uint64_t calls_made)
	    : std::runtime_error(msg + " (after " + std::to_string(calls_made) + " solver calls)")
	    , calls_(calls_made)
	{}

	std::uint64_t calls_made() const { return calls_; }

private:
	std::uint64_t calls_;
};

/*! \brief One streamlined counting instance over a CNF back-end.
 *
 * Owns the solver, the attached XOR-derived clauses and the blocking clauses
 * accumulated during enumeration. Blocking clauses mention projection
 * variables only, so auxiliary variables introduced by parity encodings never
 * perturb the projected count. Single-owner; sessions are rebuilt fresh for
 * every counting iteration.
 */
class solver_session {
public:
	explicit solver_session(cnf_formula const& f, std::unique_ptr<sat_solver> backend = nullptr)
	    : solver_(backend ? std::move(backend) : make_default_solver())
	    , projection_(f.projection)
	    , next_free_var_(f.num_vars + 1)
	{
		solver_->ensure_vars(f.num_vars);
		for (auto const& c : f.clauses)
			solver_->add_clause(c);
	}

	void set_conflict_budget(std::uint64_t per_call) { solver_->set_conflict_budget(per_call); }

	void add_xors(std::vector<xor_constraint> const& xors)
	{
		for (auto const& x : xors) {
			if (solver_->supports_xor_clauses()) {
				solver_->add_xor_clause(x.vars, x.parity);
				continue;
			}
			auto enc = encode_xor_cnf(x, next_free_var_);
			next_free_var_ = enc.next_free_var;
			solver_->ensure_vars(next_free_var_ - 1);
			for (auto const& c : enc.clauses)
				solver_->add_clause(c);
		}
	}

	/*! Exclude one projected assignment (values aligned with the projection). */
	void block(std::vector<bool> const& projected_values)
	{
		if (projected_values.size() != projection_.size())
			throw std::invalid_argument("blocked assignment must cover exactly the projection");
		clause blocking;
		blocking.reserve(projection_.size());
		for (std::size_t i = 0; i < projection_.size(); ++i)
			blocking.push_back(projected_values[i] ? -projection_[i] : projection_[i]);
		solver_->add_clause(blocking);
	}

	solve_result solve_once()
	{
		++solve_calls_;
		return solver_->solve();
	}

	std::vector<bool> projected_model() const
	{
		std::vector<bool> values;
		values.reserve(projection_.size());
		for (int v : projection_)
			values.push_back(solver_->model_value(v));
		return values;
	}

	std::uint64_t solve_calls() const { return solve_calls_; }
	std::vector<int> const& projection() const { return projection_; }

private:
	std::unique_ptr<sat_solver> solver_;
	std::vector<int> projection_;
	int next_free_var_;
	std::uint64_t solve_calls_ = 0;
};

/*! \brief Enumerate projected models of the streamlined formula, up to cap.
 *
 * Adds the parity constraints, then repeatedly solves, blocking each found
 * projected assignment. Stops on unsatisfiable (exact count, n_sat + 1 solver
 * calls) or when cap solutions were found (saturated, cap solver calls).
 */
inline query_outcome exhaust_up_to_c(solver_session& session,
                                     std::vector<xor_constraint> const& xors, std::uint64_t cap,
                                     std::vector<std::vector<bool>>* found = nullptr)
{
	if (cap < 1)
		throw std::invalid_argument("enumeration cap must be at least 1");
	session.add_xors(xors);

	query_outcome out;
	for (;;) {
		switch (session.solve_once()) {
		case solve_result::unsat:
			out.saturated = false;
			return out;
		case solve_result::unknown:
			throw solver_error("solver effort budget exhausted", session.solve_calls());
		case solve_result::sat:
			break;
		}
		auto model = session.projected_model();
		session.block(model);
		if (found)
			found->push_back(std::move(model));
		if (++out.n_sat == cap) {
			out.saturated = true;
			return out;
		}
	}
}

} // namespace xmc
