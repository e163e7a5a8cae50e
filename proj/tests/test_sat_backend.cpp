/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include <xmc/generators.hpp>
#include <xmc/oracle.hpp>
#include <xmc/rng.hpp>
#include <xmc/sat_backend.hpp>

using namespace xmc;

namespace {

cnf_formula three_of_four()
{
	// projected models {00, 01, 10}: forbid v1 & v2
	cnf_formula f;
	f.num_vars = 2;
	f.projection = {1, 2};
	f.clauses = {{-1, -2}};
	return f;
}

cnf_formula free_vars(int n)
{
	cnf_formula f;
	f.num_vars = n;
	f.projection.resize(n);
	std::iota(f.projection.begin(), f.projection.end(), 1);
	f.clauses = {{1, -1}};
	return f;
}

std::uint64_t pack(std::vector<bool> const& bits)
{
	std::uint64_t v = 0;
	for (std::size_t i = 0; i < bits.size(); ++i)
		v |= std::uint64_t(bits[i]) << i;
	return v;
}

class unknown_solver final : public sat_solver {
public:
	void ensure_vars(int n) override { n_ = std::max(n_, n); }
	int num_vars() const override { return n_; }
	bool add_clause(clause const&) override { return true; }
	solve_result solve() override { return solve_result::unknown; }
	bool model_value(int) const override { return false; }

private:
	int n_ = 0;
};

/*! Pretends to support parity clauses natively; encodes them internally so
 *  results stay checkable. */
class native_xor_solver final : public sat_solver {
public:
	void ensure_vars(int n) override { inner_.ensure_vars(n); }
	int num_vars() const override { return inner_.num_vars(); }
	bool add_clause(clause const& c) override { return inner_.add_clause(c); }
	solve_result solve() override { return inner_.solve(); }
	bool model_value(int v) const override { return inner_.model_value(v); }
	bool supports_xor_clauses() const override { return true; }

	bool add_xor_clause(std::vector<int> const& vars, bool parity) override
	{
		++xor_clauses_added;
		auto const enc = encode_xor_cnf(xor_constraint{vars, parity}, inner_.num_vars() + 1);
		inner_.ensure_vars(enc.next_free_var - 1);
		bool ok = true;
		for (auto const& c : enc.clauses)
			ok = inner_.add_clause(c) && ok;
		return ok;
	}

	int xor_clauses_added = 0;

private:
	cdcl_solver inner_;
};

} // namespace

TEST_CASE("load and solve trivia")
{
	cnf_formula one;
	one.num_vars = 1;
	one.projection = {1};
	one.clauses = {{1}};
	solver_session s(one);
	CHECK(s.solve_once() == solve_result::sat);

	cnf_formula contradiction;
	contradiction.num_vars = 1;
	contradiction.projection = {1};
	contradiction.clauses = {{1}, {-1}};
	solver_session u(contradiction);
	CHECK(u.solve_once() == solve_result::unsat);
}

TEST_CASE("no constraints behaves identically to an empty constraint list")
{
	auto const f = three_of_four();
	solver_session a(f);
	auto const ra = exhaust_up_to_c(a, {}, 10);
	solver_session b(f);
	b.add_xors({});
	auto const rb = exhaust_up_to_c(b, {}, 10);
	CHECK(ra == rb);
	CHECK(ra.n_sat == 3);
}

TEST_CASE("exhaust finds all three models, or saturates at the cap")
{
	auto const f = three_of_four();
	{
		solver_session s(f);
		auto const out = exhaust_up_to_c(s, {}, 10);
		CHECK(out.n_sat == 3);
		CHECK_FALSE(out.saturated);
		CHECK(s.solve_calls() == 4); // n + 1 when not saturated
	}
	{
		solver_session s(f);
		auto const out = exhaust_up_to_c(s, {}, 2);
		CHECK(out.n_sat == 2);
		CHECK(out.saturated);
		CHECK(s.solve_calls() == 2); // exactly c when saturated
	}
}

TEST_CASE("a full-support constraint halves the complete cube")
{
	auto const f = free_vars(4);
	for (bool parity : {false, true}) {
		solver_session s(f);
		auto const out = exhaust_up_to_c(s, {xor_constraint{{1, 2, 3, 4}, parity}}, 100);
		CHECK(out.n_sat == 8);
		CHECK_FALSE(out.saturated);
	}
}

TEST_CASE("blocking removes exactly one projected assignment")
{
	// single model (1,1)
	cnf_formula f;
	f.num_vars = 2;
	f.projection = {1, 2};
	f.clauses = {{1}, {2}};
	{
		solver_session s(f);
		s.block({true, true});
		CHECK(s.solve_once() == solve_result::unsat);
	}
	{
		solver_session s(f);
		s.block({false, false}); // not a model: count unchanged
		auto const out = exhaust_up_to_c(s, {}, 10);
		CHECK(out.n_sat == 1);
	}
	{
		solver_session s(free_vars(2));
		s.block({false, false});
		auto const out = exhaust_up_to_c(s, {}, 10);
		CHECK(out.n_sat == 3);
	}
}

TEST_CASE("blocked assignments never repeat and match the oracle")
{
	random_source rng(31);
	auto& gen = rng.stream("g");
	for (int round = 0; round < 50; ++round) {
		int const nv = 6 + int(gen.next_u64() % 9);
		int const nc = nv + int(gen.next_u64() % (2 * nv));
		int const pw = 1 + int(gen.next_u64() % std::min(nv, 8));
		auto const f = random_cnf(nv, nc, pw, gen);
		auto const truth = oracle::exact_count(f);

		solver_session s(f);
		std::vector<std::vector<bool>> found;
		auto const out = exhaust_up_to_c(s, {}, truth.count + 5, &found);
		CHECK_FALSE(out.saturated);
		CHECK(out.n_sat == truth.count);
		CHECK(s.solve_calls() == truth.count + 1);

		std::set<std::uint64_t> got;
		for (auto const& m : found)
			got.insert(pack(m));
		CHECK(got.size() == found.size()); // all distinct in projection
		CHECK(std::vector<std::uint64_t>(got.begin(), got.end()) == truth.values);
	}
}

TEST_CASE("monotone in the cap, and a prefix of the longer run")
{
	auto const f = free_vars(4);
	std::vector<xor_constraint> const xors{{{1, 3}, true}};
	std::vector<std::vector<bool>> found1, found2;
	solver_session s1(f), s2(f);
	auto const o1 = exhaust_up_to_c(s1, xors, 3, &found1);
	auto const o2 = exhaust_up_to_c(s2, xors, 100, &found2);
	CHECK(o1.n_sat <= o2.n_sat);
	CHECK(o1.n_sat == 3);
	CHECK(o2.n_sat == 8);
	CHECK_FALSE(o2.saturated);
	// deterministic enumeration: the capped run is a prefix
	for (std::size_t i = 0; i < found1.size(); ++i)
		CHECK(found1[i] == found2[i]);

	// when the larger run finishes below the smaller cap, the runs agree
	std::vector<std::vector<bool>> found3, found4;
	solver_session s3(f), s4(f);
	auto const o3 = exhaust_up_to_c(s3, xors, 10, &found3);
	auto const o4 = exhaust_up_to_c(s4, xors, 100, &found4);
	CHECK_FALSE(o4.saturated);
	CHECK(o4.n_sat <= 10);
	CHECK(o3.n_sat == o4.n_sat);
	CHECK(found3 == found4);
}

TEST_CASE("streamlining is unbiased over the full draw space")
{
	// two model sets over 3 projected bits: an affine one and a generic one
	cnf_formula parity3;
	parity3.num_vars = 3;
	parity3.projection = {1, 2, 3};
	detail::add_parity_clauses(parity3.clauses, {1, 2, 3}, true);

	cnf_formula notall;
	notall.num_vars = 3;
	notall.projection = {1, 2, 3};
	notall.clauses = {{-1, -2, -3}}; // 7 models

	for (auto const* f : {&parity3, &notall}) {
		std::uint64_t const n_models = oracle::exact_count(*f).count;
		std::uint64_t total = 0;
		for (std::uint64_t mask = 0; mask < 8; ++mask) {
			for (int parity = 0; parity <= 1; ++parity) {
				xor_constraint x;
				for (int v = 1; v <= 3; ++v)
					if ((mask >> (v - 1)) & 1)
						x.vars.push_back(v);
				x.parity = parity != 0;
				solver_session s(*f);
				total += exhaust_up_to_c(s, {x}, 100).n_sat;
			}
		}
		CHECK(total * 2 == 16 * n_models); // mean == N / 2 exactly
	}
}

TEST_CASE("solver giving up surfaces as solver_error with call statistics")
{
	auto const f = three_of_four();
	solver_session s(f, std::make_unique<unknown_solver>());
	try {
		exhaust_up_to_c(s, {}, 10);
		FAIL("expected solver_error");
	} catch (solver_error const& e) {
		CHECK(e.calls_made() == 1);
	}
}

TEST_CASE("native parity support bypasses the CNF encoding")
{
	auto const f = free_vars(4);
	auto native = std::make_unique<native_xor_solver>();
	auto* raw = native.get();
	solver_session s(f, std::move(native));
	auto const out = exhaust_up_to_c(s, {xor_constraint{{1, 2, 3, 4}, false}}, 100);
	CHECK(raw->xor_clauses_added == 1);
	CHECK(out.n_sat == 8);
}
