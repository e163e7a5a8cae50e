/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <cstdint>
#include <limits>

namespace xmc {

/*! Sentinel enumeration cap meaning "no cap". The driver always narrows it to
 *  a finite safety cap before a query is issued. */
inline constexpr std::uint64_t infinite_cap = std::numeric_limits<std::uint64_t>::max();

/*! One iteration's query choice: k parity constraints, enumerate up to c. */
struct query_plan {
	int k = 0;
	std::uint64_t c = infinite_cap;

	bool exact_mode() const { return k == 0 && c == infinite_cap; }

	friend bool operator==(query_plan const&, query_plan const&) = default;
};

/*! Result of an exhaust-up-to-c query.
 *
 * saturated == false means n_sat is the exact number of projected models of
 * the streamlined formula; saturated == true means enumeration stopped at the
 * cap, so the true streamlined count is >= n_sat.
 */
struct query_outcome {
	std::uint64_t n_sat = 0;
	bool saturated = false;

	friend bool operator==(query_outcome const&, query_outcome const&) = default;
};

} // namespace xmc
