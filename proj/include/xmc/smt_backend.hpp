/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <csignal>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "errors.hpp"
#include "query.hpp"
#include "sexpr.hpp"
#include "xor_constraint.hpp"

namespace xmc {

class smt_error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/*! \brief SMT-LIB2 input with one designated output bit-vector.
 *
 * `script` holds the user's declarations and assertions (no check-sat).
 * When the output term is a float, `float_view` gives its exponent and
 * significand widths; a fresh bit-vector equal to the float's IEEE encoding
 * is then introduced and counted instead, so distinct bit patterns are what
 * get enumerated.
 */
struct smt_problem {
	std::string script;
	std::string output_name;
	unsigned output_width = 0;
	std::string logic; // optional; emitted as (set-logic ...) when nonempty
	std::optional<std::pair<unsigned, unsigned>> float_view; // (exponent, significand) bits
};

struct solver_process_config {
	std::string command;      // run through /bin/sh -c; must speak SMT-LIB2 on stdio
	int query_timeout_ms = 0; // per check-sat/get-value read; 0 = no limit
};

namespace detail {

/*! Line-oriented subprocess with balanced-s-expression reads. */
class subprocess {
public:
	explicit subprocess(std::string const& command)
	{
		// a dying solver must not take us down with SIGPIPE
		static bool const sigpipe_ignored = [] {
			::signal(SIGPIPE, SIG_IGN);
			return true;
		}();
		(void)sigpipe_ignored;

		int to_child[2], from_child[2];
		if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
			throw smt_error("cannot create pipes for solver process");
		pid_ = ::fork();
		if (pid_ < 0)
			throw smt_error("cannot fork solver process");
		if (pid_ == 0) {
			::dup2(to_child[0], 0);
			::dup2(from_child[1], 1);
			::close(to_child[0]);
			::close(to_child[1]);
			::close(from_child[0]);
			::close(from_child[1]);
			::execl("/bin/sh", "sh", "-c", command.c_str(), (char*)nullptr);
			_exit(127);
		}
		::close(to_child[0]);
		::close(from_child[1]);
		in_fd_ = to_child[1];
		out_fd_ = from_child[0];
	}

	subprocess(subprocess const&) = delete;
	subprocess& operator=(subprocess const&) = delete;

	~subprocess()
	{
		if (in_fd_ >= 0)
			::close(in_fd_);
		if (out_fd_ >= 0)
			::close(out_fd_);
		if (pid_ > 0) {
			int status = 0;
			for (int grace = 0; grace < 200; ++grace) {
				if (::waitpid(pid_, &status, WNOHANG) != 0)
					return;
				::usleep(5000);
			}
			::kill(pid_, SIGKILL);
			::waitpid(pid_, &status, 0);
		}
	}

	void send(std::string_view text)
	{
		std::size_t off = 0;
		while (off < text.size()) {
			ssize_t const n = ::write(in_fd_, text.data() + off, text.size() - off);
			if (n <= 0)
				throw smt_error("solver process closed its input");
			off += static_cast<std::size_t>(n);
		}
	}

	/*! Next nonempty line (without newline). */
	std::string read_line(int timeout_ms)
	{
		for (;;) {
			auto const nl = buf_.find('\n');
			if (nl != std::string::npos) {
				std::string line = buf_.substr(0, nl);
				buf_.erase(0, nl + 1);
				while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
					line.pop_back();
				if (!line.empty())
					return line;
				continue;
			}
			fill(timeout_ms);
		}
	}

	/*! A balanced parenthesized expression (may span lines). */
	std::string read_sexpr(int timeout_ms)
	{
		for (;;) {
			std::size_t pos = 0;
			detail::skip_ws(buf_, pos);
			if (pos < buf_.size() && buf_[pos] != '(') // bare atom answer
				return read_line(timeout_ms);
			std::size_t consumed = 0;
			if (parse_sexpr(buf_, &consumed)) {
				std::string text = buf_.substr(0, consumed);
				buf_.erase(0, consumed);
				return text;
			}
			fill(timeout_ms);
		}
	}

private:
	void fill(int timeout_ms)
	{
		struct pollfd pfd = {out_fd_, POLLIN, 0};
		int const r = ::poll(&pfd, 1, timeout_ms <= 0 ? -1 : timeout_ms);
		if (r == 0) {
			::kill(pid_, SIGKILL);
			throw smt_error("per-query time limit exceeded; solver killed");
		}
		if (r < 0)
			throw smt_error("poll on solver output failed");
		char chunk[4096];
		ssize_t const n = ::read(out_fd_, chunk, sizeof chunk);
		if (n <= 0)
			throw smt_error("solver process exited unexpectedly");
		buf_.append(chunk, static_cast<std::size_t>(n));
	}

	int in_fd_ = -1;
	int out_fd_ = -1;
	pid_t pid_ = -1;
	std::string buf_;
};

} // namespace detail

/*! Render bits (LSB first) as an SMT-LIB binary literal. */
inline std::string bv_literal(std::vector<bool> const& bits_lsb_first)
{
	std::string s = "#b";
	for (auto it = bits_lsb_first.rbegin(); it != bits_lsb_first.rend(); ++it)
		s += *it ? '1' : '0';
	return s;
}

/*! Parse #b..., #x... or (_ bvN w) bit-vector values into LSB-first bits. */
inline std::optional<std::vector<bool>> parse_bv_value(sexpr const& v, unsigned width)
{
	std::vector<bool> bits(width, false);
	if (v.is_atom()) {
		std::string_view const a = v.atom;
		if (a.size() > 2 && a[0] == '#' && a[1] == 'b') {
			if (a.size() - 2 != width)
				return std::nullopt;
			for (unsigned i = 0; i < width; ++i)
				bits[i] = a[a.size() - 1 - i] == '1';
			return bits;
		}
		if (a.size() > 2 && a[0] == '#' && a[1] == 'x') {
			if ((a.size() - 2) * 4 != width)
				return std::nullopt;
			for (unsigned d = 0; d < a.size() - 2; ++d) {
				char const c = a[a.size() - 1 - d];
				int nib;
				if (c >= '0' && c <= '9')
					nib = c - '0';
				else if (c >= 'a' && c <= 'f')
					nib = c - 'a' + 10;
				else if (c >= 'A' && c <= 'F')
					nib = c - 'A' + 10;
				else
					return std::nullopt;
				for (int b = 0; b < 4; ++b)
					bits[d * 4 + b] = (nib >> b) & 1;
			}
			return bits;
		}
		return std::nullopt;
	}
	// (_ bvN w)
	if (v.items.size() == 3 && v.items[0].atom == "_" && v.items[1].atom.rfind("bv", 0) == 0) {
		try {
			unsigned long long const num = std::stoull(v.items[1].atom.substr(2));
			if (std::stoul(v.items[2].atom) != width || width > 64)
				return std::nullopt;
			for (unsigned i = 0; i < width; ++i)
				bits[i] = (num >> i) & 1;
			return bits;
		} catch (...) {
			return std::nullopt;
		}
	}
	return std::nullopt;
}

/*! Assertion text for one parity constraint over single-bit extracts of
 *  `term`; bit indices come from the constraint's variable list. */
inline std::string xor_assertion(xor_constraint const& x, std::string const& term)
{
	if (x.vars.empty())
		return x.parity ? "(assert false)" : "(assert true)";
	auto bit = [&](int i) {
		return "(= ((_ extract " + std::to_string(i) + " " + std::to_string(i) + ") " + term
		       + ") #b1)";
	};
	std::string inner;
	if (x.vars.size() == 1) {
		inner = bit(x.vars[0]);
	} else {
		inner = "(xor";
		for (int i : x.vars)
			inner += " " + bit(i);
		inner += ")";
	}
	return "(assert (= " + inner + (x.parity ? " true))" : " false))");
}

/*! \brief One counting instance driven over an external SMT solver process.
 *
 * Speaks plain SMT-LIB2 over the solver's standard streams. A session owns
 * one solver process; the driver starts a fresh session per iteration, so no
 * solver state leaks between iterations. `unknown` answers abort the run:
 * treating them as unsat would make counts unsound.
 */
class smt_session {
public:
	smt_session(smt_problem const& problem, solver_process_config const& config)
	    : proc_(config.command)
	    , timeout_ms_(config.query_timeout_ms)
	    , width_(problem.output_width)
	{
		if (problem.output_width == 0)
			throw input_error("output width must be at least 1");
		std::string prelude = "(set-option :print-success false)\n";
		if (!problem.logic.empty())
			prelude += "(set-logic " + problem.logic + ")\n";
		proc_.send(prelude);
		proc_.send(problem.script);
		proc_.send("\n");

		if (problem.float_view) {
			auto const [eb, sb] = *problem.float_view;
			if (eb + sb != problem.output_width)
				throw input_error("float view widths must sum to the output width");
			term_ = "xmc_output_bits";
			proc_.send("(declare-const " + term_ + " (_ BitVec "
			           + std::to_string(problem.output_width) + "))\n");
			proc_.send("(assert (= ((_ to_fp " + std::to_string(eb) + " " + std::to_string(sb)
			           + ") " + term_ + ") " + problem.output_name + "))\n");
		} else {
			term_ = problem.output_name;
		}
	}

	/*! Same contract as the CNF-mode exhaust: enumerate distinct output
	 *  values under the given parity constraints, blocking each one, up to
	 *  cap. */
	query_outcome exhaust_up_to_c(std::vector<xor_constraint> const& xors, std::uint64_t cap,
	                              std::vector<std::vector<bool>>* found = nullptr)
	{
		if (cap < 1)
			throw std::invalid_argument("enumeration cap must be at least 1");
		for (auto const& x : xors)
			proc_.send(xor_assertion(x, term_) + "\n");

		std::unordered_set<std::string> seen;
		query_outcome out;
		for (;;) {
			proc_.send("(check-sat)\n");
			++check_sat_calls_;
			std::string const answer = proc_.read_line(timeout_ms_);
			if (answer == "unsat")
				return out;
			if (answer == "unknown")
				throw smt_error("solver answered unknown; aborting (counting with unknown "
				                "would be unsound)");
			if (answer != "sat")
				throw smt_error("unexpected solver response: " + answer);

			proc_.send("(get-value (" + term_ + "))\n");
			std::string const resp = proc_.read_sexpr(timeout_ms_);
			auto const bits = parse_value_response(resp);
			std::string const literal = bv_literal(bits);
			if (!seen.insert(literal).second)
				throw smt_error("solver repeated the blocked value " + literal);
			proc_.send("(assert (distinct " + term_ + " " + literal + "))\n");
			if (found)
				found->push_back(bits);
			if (++out.n_sat == cap) {
				out.saturated = true;
				return out;
			}
		}
	}

	std::uint64_t check_sat_calls() const { return check_sat_calls_; }

	~smt_session()
	{
		try {
			proc_.send("(exit)\n");
		} catch (...) {
			// solver already gone; reaped by the subprocess destructor
		}
	}

private:
	std::vector<bool> parse_value_response(std::string const& text) const
	{
		auto const node = parse_sexpr(text);
		if (node && node->list && node->items.size() >= 1 && node->items[0].list
		    && node->items[0].items.size() == 2) {
			auto const bits = parse_bv_value(node->items[0].items[1], width_);
			if (bits)
				return *bits;
		}
		if (text.rfind("(error", 0) == 0)
			throw smt_error("solver error: " + text);
		throw smt_error("cannot parse get-value response: " + text);
	}

	detail::subprocess proc_;
	int timeout_ms_;
	unsigned width_;
	std::string term_;
	std::uint64_t check_sat_calls_ = 0;
};

} // namespace xmc
