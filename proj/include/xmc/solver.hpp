/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cnf.hpp"

namespace xmc {

enum class solve_result { sat, unsat, unknown };

/*! \brief Capability contract for CNF back-ends.
 *
 * A back-end must support adding clauses, deciding satisfiability and reading
 * model values. Native parity-clause support is optional; when absent, XOR
 * constraints are encoded through encode_xor_cnf before they reach the solver.
 */
class sat_solver {
public:
	virtual ~sat_solver() = default;

	virtual void ensure_vars(int n) = 0;
	virtual int num_vars() const = 0;
	/*! Returns false if the clause database became trivially unsatisfiable. */
	virtual bool add_clause(clause const& c) = 0;
	virtual solve_result solve() = 0;
	/*! Value of a variable in the last satisfying assignment. */
	virtual bool model_value(int var) const = 0;

	virtual bool supports_xor_clauses() const { return false; }
	virtual bool add_xor_clause(std::vector<int> const& /*vars*/, bool /*parity*/)
	{
		throw std::logic_error("back-end has no native parity clauses");
	}

	/*! Abort solve() with `unknown` after this many conflicts (0 = no limit). */
	virtual void set_conflict_budget(std::uint64_t) {}
};

/*! \brief A small conflict-driven clause-learning solver.
 *
 * Two watched literals, 1UIP learning, activity-based branching with phase
 * saving. No restarts and no clause deletion: sessions are rebuilt per
 * counting iteration and the streamlined instances stay small, so learned
 * clauses are simply kept. Fully deterministic.
 */
class cdcl_solver final : public sat_solver {
public:
	void ensure_vars(int n) override
	{
		while (num_vars_ < n)
			new_var();
	}

	int num_vars() const override { return num_vars_; }

	bool add_clause(clause const& external) override
	{
		if (!ok_)
			return false;
		cancel_until(0);

		std::vector<int> lits;
		lits.reserve(external.size());
		for (int dl : external) {
			if (dl == 0)
				throw std::invalid_argument("zero literal in clause");
			int const v = dl > 0 ? dl : -dl;
			ensure_vars(v);
			lits.push_back(mk_lit(v - 1, dl < 0));
		}
		std::sort(lits.begin(), lits.end());
		lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
		for (std::size_t i = 0; i + 1 < lits.size(); ++i)
			if ((lits[i] ^ 1) == lits[i + 1])
				return true; // tautology

		std::vector<int> kept;
		for (int l : lits) {
			signed char const val = lit_value(l);
			if (val == 1)
				return true; // satisfied at root
			if (val == 0)
				kept.push_back(l); // undetermined
		}
		if (kept.empty()) {
			ok_ = false;
			return false;
		}
		if (kept.size() == 1) {
			enqueue(kept[0], -1);
			if (propagate() >= 0)
				ok_ = false;
			return ok_;
		}
		attach_clause(std::move(kept));
		return true;
	}

	solve_result solve() override
	{
		if (!ok_)
			return solve_result::unsat;
		cancel_until(0);
		std::uint64_t const conflict_limit =
		    budget_ == 0 ? 0 : conflicts_ + budget_;

		for (;;) {
			int const confl = propagate();
			if (confl >= 0) {
				++conflicts_;
				if (decision_level() == 0) {
					ok_ = false;
					return solve_result::unsat;
				}
				if (conflict_limit != 0 && conflicts_ >= conflict_limit) {
					cancel_until(0);
					return solve_result::unknown;
				}
				analyze_and_backjump(confl);
			} else {
				int const v = pick_branch_var();
				if (v < 0) {
					save_model();
					cancel_until(0);
					return solve_result::sat;
				}
				trail_lim_.push_back(static_cast<int>(trail_.size()));
				enqueue(mk_lit(v, polarity_[v] == 0), -1);
			}
		}
	}

	bool model_value(int var) const override
	{
		return model_.at(static_cast<std::size_t>(var - 1)) != 0;
	}

	void set_conflict_budget(std::uint64_t b) override { budget_ = b; }

	std::uint64_t conflicts() const { return conflicts_; }

private:
	// literal encoding: lit = var << 1 | sign, sign 1 = negated
	static int mk_lit(int var0, bool negated) { return var0 << 1 | int(negated); }
	static int var_of(int lit) { return lit >> 1; }

	/*! 1 true, -1 false, 0 unassigned. */
	signed char lit_value(int lit) const
	{
		signed char const a = assigns_[var_of(lit)];
		if (a == 0)
			return 0;
		return (lit & 1) ? static_cast<signed char>(-a) : a;
	}

	void new_var()
	{
		++num_vars_;
		assigns_.push_back(0);
		level_.push_back(0);
		reason_.push_back(-1);
		activity_.push_back(0.0);
		polarity_.push_back(0);
		seen_.push_back(0);
		watches_.emplace_back();
		watches_.emplace_back();
		model_.push_back(0);
	}

	struct watcher {
		int clause_idx;
		int blocker;
	};

	void attach_clause(std::vector<int> lits)
	{
		int const idx = static_cast<int>(clauses_.size());
		watches_[lits[0]].push_back({idx, lits[1]});
		watches_[lits[1]].push_back({idx, lits[0]});
		clauses_.push_back(std::move(lits));
	}

	void enqueue(int lit, int reason)
	{
		int const v = var_of(lit);
		assigns_[v] = (lit & 1) ? -1 : 1;
		level_[v] = decision_level();
		reason_[v] = reason;
		trail_.push_back(lit);
	}

	int decision_level() const { return static_cast<int>(trail_lim_.size()); }

	/*! Returns the index of a conflicting clause, or -1. */
	int propagate()
	{
		while (qhead_ < trail_.size()) {
			int const p = trail_[qhead_++];
			int const false_lit = p ^ 1;
			auto& ws = watches_[false_lit];
			std::size_t keep = 0;
			for (std::size_t i = 0; i < ws.size(); ++i) {
				watcher const w = ws[i];
				if (lit_value(w.blocker) == 1) {
					ws[keep++] = w;
					continue;
				}
				auto& c = clauses_[w.clause_idx];
				if (c[0] == false_lit)
					std::swap(c[0], c[1]);
				// now c[1] == false_lit
				if (lit_value(c[0]) == 1) {
					ws[keep++] = {w.clause_idx, c[0]};
					continue;
				}
				bool moved = false;
				for (std::size_t j = 2; j < c.size(); ++j) {
					if (lit_value(c[j]) != -1) {
						std::swap(c[1], c[j]);
						watches_[c[1]].push_back({w.clause_idx, c[0]});
						moved = true;
						break;
					}
				}
				if (moved)
					continue;
				if (lit_value(c[0]) == -1) {
					// conflict; keep remaining watchers intact
					for (std::size_t j = i; j < ws.size(); ++j)
						ws[keep++] = ws[j];
					ws.resize(keep);
					qhead_ = trail_.size();
					return w.clause_idx;
				}
				ws[keep++] = {w.clause_idx, c[0]};
				enqueue(c[0], w.clause_idx);
			}
			ws.resize(keep);
		}
		return -1;
	}

	void bump(int v)
	{
		activity_[v] += var_inc_;
		if (activity_[v] > 1e100) {
			for (auto& a : activity_)
				a *= 1e-100;
			var_inc_ *= 1e-100;
		}
	}

	void analyze_and_backjump(int confl)
	{
		std::vector<int> learnt{0}; // slot 0 reserved for the asserting literal
		int counter = 0;
		int p = -1;
		std::size_t idx = trail_.size();

		for (;;) {
			auto const& c = clauses_[confl];
			for (std::size_t j = (p == -1 ? 0 : 1); j < c.size(); ++j) {
				int const q = c[j];
				int const v = var_of(q);
				if (!seen_[v] && level_[v] > 0) {
					seen_[v] = 1;
					bump(v);
					if (level_[v] >= decision_level())
						++counter;
					else
						learnt.push_back(q);
				}
			}
			while (!seen_[var_of(trail_[idx - 1])])
				--idx;
			p = trail_[--idx];
			seen_[var_of(p)] = 0;
			if (--counter == 0)
				break;
			confl = reason_[var_of(p)];
		}
		learnt[0] = p ^ 1;
		for (std::size_t j = 1; j < learnt.size(); ++j)
			seen_[var_of(learnt[j])] = 0;

		int back_level = 0;
		if (learnt.size() > 1) {
			// move a literal of the highest remaining level to slot 1
			std::size_t max_at = 1;
			for (std::size_t j = 2; j < learnt.size(); ++j)
				if (level_[var_of(learnt[j])] > level_[var_of(learnt[max_at])])
					max_at = j;
			std::swap(learnt[1], learnt[max_at]);
			back_level = level_[var_of(learnt[1])];
		}
		cancel_until(back_level);

		if (learnt.size() == 1) {
			enqueue(learnt[0], -1);
		} else {
			int const asserting = learnt[0];
			attach_clause(std::move(learnt));
			enqueue(asserting, static_cast<int>(clauses_.size()) - 1);
		}
		var_inc_ /= 0.95;
	}

	void cancel_until(int level)
	{
		if (decision_level() <= level)
			return;
		std::size_t const bound = static_cast<std::size_t>(trail_lim_[level]);
		for (std::size_t i = trail_.size(); i > bound; --i) {
			int const v = var_of(trail_[i - 1]);
			polarity_[v] = assigns_[v] == 1 ? 1 : 0;
			assigns_[v] = 0;
		}
		trail_.resize(bound);
		trail_lim_.resize(level);
		qhead_ = bound;
	}

	int pick_branch_var() const
	{
		int best = -1;
		double best_act = -1.0;
		for (int v = 0; v < num_vars_; ++v)
			if (assigns_[v] == 0 && activity_[v] > best_act) {
				best = v;
				best_act = activity_[v];
			}
		return best;
	}

	void save_model()
	{
		for (int v = 0; v < num_vars_; ++v)
			model_[v] = assigns_[v] == 1 ? 1 : 0;
	}

	int num_vars_ = 0;
	bool ok_ = true;
	std::vector<std::vector<int>> clauses_;
	std::vector<std::vector<watcher>> watches_; // indexed by literal
	std::vector<signed char> assigns_;
	std::vector<int> level_;
	std::vector<int> reason_;
	std::vector<int> trail_;
	std::vector<int> trail_lim_;
	std::size_t qhead_ = 0;
	std::vector<double> activity_;
	double var_inc_ = 1.0;
	std::vector<unsigned char> polarity_;
	std::vector<unsigned char> seen_;
	std::vector<unsigned char> model_;
	std::uint64_t conflicts_ = 0;
	std::uint64_t budget_ = 0;
};

inline std::unique_ptr<sat_solver> make_default_solver()
{
	return std::make_unique<cdcl_solver>();
}

} // namespace xmc
