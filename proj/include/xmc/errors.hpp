/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <stdexcept>
#include <string>

namespace xmc {

class parse_error : public std::runtime_error {
public:
	parse_error(unsigned line, std::string const& msg)
	    : std::runtime_error("parse error at line " + std::to_string(line) + ": " + msg)
	    , line_(line)
	{}

	unsigned line() const { return line_; }

private:
	unsigned line_;
};

/*! Bad user-supplied input other than syntax: out-of-range options, oversized
 *  problems for an exhaustive oracle, empty prior ranges and the like. */
class input_error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

} // namespace xmc
