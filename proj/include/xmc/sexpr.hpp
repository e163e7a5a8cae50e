/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xmc {

/*! Minimal SMT-LIB2 s-expression: an atom (symbol, literal, |quoted| or
 *  "string", kept verbatim) or a list. */
struct sexpr {
	std::string atom;
	std::vector<sexpr> items;
	bool list = false;

	bool is_atom() const { return !list; }
};

namespace detail {

inline void skip_ws(std::string_view s, std::size_t& pos)
{
	while (pos < s.size()) {
		char const c = s[pos];
		if (c == ';') { // line comment
			while (pos < s.size() && s[pos] != '\n')
				++pos;
		} else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
			++pos;
		} else {
			break;
		}
	}
}

inline std::optional<sexpr> parse_sexpr_at(std::string_view s, std::size_t& pos)
{
	skip_ws(s, pos);
	if (pos >= s.size())
		return std::nullopt;

	if (s[pos] == '(') {
		++pos;
		sexpr node;
		node.list = true;
		for (;;) {
			skip_ws(s, pos);
			if (pos >= s.size())
				return std::nullopt; // unbalanced
			if (s[pos] == ')') {
				++pos;
				return node;
			}
			auto child = parse_sexpr_at(s, pos);
			if (!child)
				return std::nullopt;
			node.items.push_back(std::move(*child));
		}
	}
	if (s[pos] == ')')
		return std::nullopt;

	sexpr node;
	if (s[pos] == '"' || s[pos] == '|') {
		char const quote = s[pos];
		std::size_t const start = pos++;
		while (pos < s.size() && s[pos] != quote)
			++pos;
		if (pos >= s.size())
			return std::nullopt;
		++pos;
		node.atom = std::string(s.substr(start, pos - start));
		return node;
	}
	std::size_t const start = pos;
	while (pos < s.size() && s[pos] != '(' && s[pos] != ')' && s[pos] != ';' && s[pos] != ' '
	       && s[pos] != '\t' && s[pos] != '\n' && s[pos] != '\r')
		++pos;
	node.atom = std::string(s.substr(start, pos - start));
	return node;
}

} // namespace detail

/*! Parse one s-expression from the front of `s`; on success `consumed` holds
 *  the number of bytes read. */
inline std::optional<sexpr> parse_sexpr(std::string_view s, std::size_t* consumed = nullptr)
{
	std::size_t pos = 0;
	auto res = detail::parse_sexpr_at(s, pos);
	if (res && consumed)
		*consumed = pos;
	return res;
}

/*! Parse a whole script into top-level expressions; returns nullopt on any
 *  syntax error. */
inline std::optional<std::vector<sexpr>> parse_sexpr_all(std::string_view s)
{
	std::vector<sexpr> out;
	std::size_t pos = 0;
	for (;;) {
		detail::skip_ws(s, pos);
		if (pos >= s.size())
			return out;
		auto node = detail::parse_sexpr_at(s, pos);
		if (!node)
			return std::nullopt;
		out.push_back(std::move(*node));
	}
}

} // namespace xmc
