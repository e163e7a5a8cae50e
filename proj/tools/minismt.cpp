/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/

// minismt: a tiny brute-force solver for a subset of SMT-LIB2 (QF_BV plus
// Bool), answering sat/unsat/get-value over its standard streams. It exists
// so that the SMT counting mode can be exercised end to end without an
// external solver: it enumerates every assignment of the declared constants,
// so keep the total state below ~24 bits. Deterministic: the reported model
// is always the numerically smallest satisfying assignment.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

#include <xmc/sexpr.hpp>

namespace {

struct value {
	bool is_bool = false;
	unsigned width = 0; // bit-vector width; unused for bools
	std::uint64_t bits = 0;
};

struct variable {
	std::string name;
	bool is_bool = false;
	unsigned width = 0;
};

struct eval_error {
	std::string msg;
};

std::vector<variable> vars;
std::vector<xmc::sexpr> assertions;
std::vector<std::uint64_t> model; // per variable, valid after sat
bool have_model = false;
bool always_unknown = false;
int sleep_ms = 0;
unsigned max_bits = 24;

std::uint64_t mask_of(unsigned w)
{
	return w >= 64 ? ~0ull : (1ull << w) - 1;
}

value eval(xmc::sexpr const& t);

value eval_symbol(std::string const& name)
{
	for (std::size_t i = 0; i < vars.size(); ++i)
		if (vars[i].name == name)
			return {vars[i].is_bool, vars[i].width, model[i]};
	throw eval_error{"unknown symbol " + name};
}

value require_bool(xmc::sexpr const& t)
{
	value const v = eval(t);
	if (!v.is_bool)
		throw eval_error{"expected Bool operand"};
	return v;
}

value require_bv(xmc::sexpr const& t)
{
	value const v = eval(t);
	if (v.is_bool)
		throw eval_error{"expected bit-vector operand"};
	return v;
}

value eval(xmc::sexpr const& t)
{
	if (t.is_atom()) {
		std::string const& a = t.atom;
		if (a == "true")
			return {true, 0, 1};
		if (a == "false")
			return {true, 0, 0};
		if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
			value v{false, unsigned(a.size() - 2), 0};
			for (std::size_t i = 2; i < a.size(); ++i)
				v.bits = v.bits << 1 | std::uint64_t(a[i] == '1');
			return v;
		}
		if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
			value v{false, unsigned((a.size() - 2) * 4), 0};
			for (std::size_t i = 2; i < a.size(); ++i) {
				char const c = a[i];
				int nib = c >= '0' && c <= '9'   ? c - '0'
				          : c >= 'a' && c <= 'f' ? c - 'a' + 10
				          : c >= 'A' && c <= 'F' ? c - 'A' + 10
				                                 : -1;
				if (nib < 0)
					throw eval_error{"bad hex literal " + a};
				v.bits = v.bits << 4 | std::uint64_t(nib);
			}
			return v;
		}
		return eval_symbol(a);
	}

	if (t.items.empty())
		throw eval_error{"empty application"};

	// ((_ extract i j) t)
	if (t.items[0].list && t.items[0].items.size() == 4 && t.items[0].items[0].atom == "_"
	    && t.items[0].items[1].atom == "extract") {
		unsigned const hi = std::stoul(t.items[0].items[2].atom);
		unsigned const lo = std::stoul(t.items[0].items[3].atom);
		if (t.items.size() != 2 || hi < lo)
			throw eval_error{"bad extract"};
		value const v = require_bv(t.items[1]);
		if (hi >= v.width)
			throw eval_error{"extract beyond width"};
		return {false, hi - lo + 1, (v.bits >> lo) & mask_of(hi - lo + 1)};
	}
	// (_ bvN w) as a value
	if (t.items.size() == 3 && t.items[0].atom == "_" && t.items[1].atom.rfind("bv", 0) == 0) {
		unsigned const w = std::stoul(t.items[2].atom);
		return {false, w, std::stoull(t.items[1].atom.substr(2)) & mask_of(w)};
	}

	std::string const& op = t.items[0].atom;
	auto arity = t.items.size() - 1;

	if (op == "not") {
		return {true, 0, std::uint64_t(require_bool(t.items[1]).bits ^ 1)};
	}
	if (op == "and" || op == "or" || op == "xor") {
		std::uint64_t acc = op == "and" ? 1 : 0;
		for (std::size_t i = 1; i < t.items.size(); ++i) {
			std::uint64_t const b = require_bool(t.items[i]).bits;
			acc = op == "and" ? (acc & b) : op == "or" ? (acc | b) : (acc ^ b);
		}
		return {true, 0, acc};
	}
	if (op == "=>") {
		std::uint64_t const a = require_bool(t.items[1]).bits;
		std::uint64_t const b = require_bool(t.items[2]).bits;
		return {true, 0, std::uint64_t((a ^ 1) | b)};
	}
	if (op == "=" || op == "distinct") {
		if (arity < 2)
			throw eval_error{"= needs two operands"};
		bool all_eq = true;
		value const first = eval(t.items[1]);
		for (std::size_t i = 2; i < t.items.size(); ++i) {
			value const v = eval(t.items[i]);
			if (v.is_bool != first.is_bool || v.width != first.width)
				throw eval_error{"sort mismatch in ="};
			all_eq = all_eq && v.bits == first.bits;
		}
		return {true, 0, std::uint64_t(op == "=" ? all_eq : !all_eq)};
	}
	if (op == "ite") {
		value const c = require_bool(t.items[1]);
		return eval(t.items[c.bits ? 2 : 3]);
	}
	if (op == "bvnot") {
		value const v = require_bv(t.items[1]);
		return {false, v.width, ~v.bits & mask_of(v.width)};
	}
	if (op == "bvand" || op == "bvor" || op == "bvxor" || op == "bvadd") {
		value acc = require_bv(t.items[1]);
		for (std::size_t i = 2; i < t.items.size(); ++i) {
			value const v = require_bv(t.items[i]);
			if (v.width != acc.width)
				throw eval_error{"width mismatch in " + op};
			if (op == "bvand")
				acc.bits &= v.bits;
			else if (op == "bvor")
				acc.bits |= v.bits;
			else if (op == "bvxor")
				acc.bits ^= v.bits;
			else
				acc.bits = (acc.bits + v.bits) & mask_of(acc.width);
		}
		return acc;
	}
	if (op == "concat") {
		value const a = require_bv(t.items[1]);
		value const b = require_bv(t.items[2]);
		return {false, a.width + b.width, (a.bits << b.width | b.bits) & mask_of(a.width + b.width)};
	}
	throw eval_error{"unsupported operator " + op};
}

std::string to_text(xmc::sexpr const& t)
{
	if (t.is_atom())
		return t.atom;
	std::string s = "(";
	for (std::size_t i = 0; i < t.items.size(); ++i) {
		if (i)
			s += ' ';
		s += to_text(t.items[i]);
	}
	return s + ")";
}

std::string value_text(value const& v)
{
	if (v.is_bool)
		return v.bits ? "true" : "false";
	std::string s = "#b";
	for (unsigned i = v.width; i-- > 0;)
		s += (v.bits >> i) & 1 ? '1' : '0';
	return s;
}

bool check_sat()
{
	unsigned total_bits = 0;
	for (auto const& v : vars)
		total_bits += v.is_bool ? 1 : v.width;
	if (total_bits > max_bits)
		throw eval_error{"state space too large for brute force"};

	std::uint64_t const total = 1ull << total_bits;
	model.assign(vars.size(), 0);
	for (std::uint64_t a = 0; a < total; ++a) {
		std::uint64_t rest = a;
		for (std::size_t i = 0; i < vars.size(); ++i) {
			unsigned const w = vars[i].is_bool ? 1 : vars[i].width;
			model[i] = rest & mask_of(w);
			rest >>= w;
		}
		bool ok = true;
		for (auto const& as : assertions) {
			value const v = eval(as);
			if (!v.is_bool)
				throw eval_error{"assertion is not Bool"};
			if (!v.bits) {
				ok = false;
				break;
			}
		}
		if (ok)
			return true;
	}
	return false;
}

bool parse_sort(xmc::sexpr const& s, bool& is_bool, unsigned& width)
{
	if (s.is_atom() && s.atom == "Bool") {
		is_bool = true;
		width = 0;
		return true;
	}
	if (s.list && s.items.size() == 3 && s.items[0].atom == "_" && s.items[1].atom == "BitVec") {
		is_bool = false;
		width = std::stoul(s.items[2].atom);
		return width >= 1 && width <= 63;
	}
	return false;
}

void handle(xmc::sexpr const& cmd)
{
	if (!cmd.list || cmd.items.empty() || !cmd.items[0].is_atom()) {
		std::cout << "(error \"malformed command\")" << std::endl;
		return;
	}
	std::string const& op = cmd.items[0].atom;
	try {
		if (op == "set-option" || op == "set-logic" || op == "set-info") {
			return; // accepted silently under :print-success false
		}
		if (op == "declare-const" || op == "declare-fun") {
			std::size_t const sort_at = op == "declare-const" ? 2 : 3;
			if (cmd.items.size() != sort_at + 1
			    || (op == "declare-fun" && !cmd.items[2].items.empty()))
				throw eval_error{"unsupported declaration"};
			variable v;
			v.name = cmd.items[1].atom;
			if (!parse_sort(cmd.items[sort_at], v.is_bool, v.width))
				throw eval_error{"unsupported sort"};
			vars.push_back(v);
			model.push_back(0);
			return;
		}
		if (op == "assert") {
			if (cmd.items.size() != 2)
				throw eval_error{"assert takes one term"};
			assertions.push_back(cmd.items[1]);
			have_model = false;
			return;
		}
		if (op == "check-sat") {
			if (sleep_ms > 0)
				::usleep(useconds_t(sleep_ms) * 1000);
			if (always_unknown) {
				std::cout << "unknown" << std::endl;
				return;
			}
			have_model = check_sat();
			std::cout << (have_model ? "sat" : "unsat") << std::endl;
			return;
		}
		if (op == "get-value") {
			if (!have_model)
				throw eval_error{"no model available"};
			if (cmd.items.size() != 2 || !cmd.items[1].list)
				throw eval_error{"get-value takes a term list"};
			std::string out = "(";
			for (std::size_t i = 0; i < cmd.items[1].items.size(); ++i) {
				if (i)
					out += ' ';
				auto const& term = cmd.items[1].items[i];
				out += "(" + to_text(term) + " " + value_text(eval(term)) + ")";
			}
			out += ")";
			std::cout << out << std::endl;
			return;
		}
		if (op == "exit") {
			std::exit(0);
		}
		throw eval_error{"unsupported command " + op};
	} catch (eval_error const& e) {
		std::cout << "(error \"" << e.msg << "\")" << std::endl;
	} catch (std::exception const& e) {
		std::cout << "(error \"" << e.what() << "\")" << std::endl;
	}
}

} // namespace

int main(int argc, char** argv)
{
	for (int i = 1; i < argc; ++i) {
		if (!std::strcmp(argv[i], "--always-unknown"))
			always_unknown = true;
		else if (!std::strcmp(argv[i], "--sleep-ms") && i + 1 < argc)
			sleep_ms = std::atoi(argv[++i]);
		else if (!std::strcmp(argv[i], "--max-bits") && i + 1 < argc)
			max_bits = unsigned(std::atoi(argv[++i]));
		else {
			std::cerr << "usage: minismt [--always-unknown] [--sleep-ms N] [--max-bits N]\n";
			return 2;
		}
	}

	std::string buffer;
	char chunk[4096];
	ssize_t n;
	while ((n = ::read(0, chunk, sizeof chunk)) > 0) {
		buffer.append(chunk, std::size_t(n));
		for (;;) {
			std::size_t consumed = 0;
			auto cmd = xmc::parse_sexpr(buffer, &consumed);
			if (!cmd)
				break;
			buffer.erase(0, consumed);
			handle(*cmd);
		}
	}
	return 0;
}
