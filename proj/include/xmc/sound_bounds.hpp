/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace xmc {

/*! The counting hash family is 3-independent, so the universality degree is
 *  fixed at r = 3 throughout; the resulting confidence floor is 1 - e^-2. */
inline constexpr int hash_universality = 3;
inline constexpr double sound_confidence_floor = 0.8646647167633873;

namespace detail {

/*! 2 * r * e^(1/3) at full double precision. */
inline double sound_coefficient()
{
	return 2.0 * hash_universality * std::exp(1.0 / 3.0);
}

} // namespace detail

/*! Enumeration cap guaranteeing tolerance eps: ceil(2 r (1+eps) e^(1/3) / eps^2). */
inline std::uint64_t pivot_for_epsilon(double eps)
{
	return static_cast<std::uint64_t>(
	    std::ceil(detail::sound_coefficient() * (1.0 + eps) / (eps * eps)));
}

/*! \brief Invert the pivot relation: the tolerance a cap of c certifies.
 *
 * Positive root of c eps^2 - B eps - B = 0 with B = 2 r e^(1/3). Returns
 * nullopt for c <= 17, where no tolerance in (0, 1) is claimed.
 */
inline std::optional<double> epsilon_from_c(std::uint64_t c)
{
	if (c <= 17)
		return std::nullopt;
	double const b = detail::sound_coefficient();
	double const eps = (b + std::sqrt(b * b + 4.0 * double(c) * b)) / (2.0 * double(c));
	if (!(eps > 0.0 && eps < 1.0))
		return std::nullopt;
	return eps;
}

struct sound_bounds_result {
	double lower = 0;                // bits
	std::optional<double> upper;     // bits; absent when n_sat = 0
	double confidence = sound_confidence_floor;
};

/*! \brief Probabilistically sound influence bounds from one query.
 *
 * For an unsaturated exhaust with cap c > 17 and n_sat survivors of k
 * constraints, the true count lies in [n_sat 2^k / (1+eps), n_sat 2^k /
 * (1-eps)] with probability at least the confidence floor. Saturated queries
 * and small caps yield no claim; n_sat = 0 yields only the trivial lower
 * bound, with no upper bound claimed.
 */
inline std::optional<sound_bounds_result> sound_bounds(int k, std::uint64_t c,
                                                       std::uint64_t n_sat, bool saturated,
                                                       double width)
{
	if (saturated)
		return std::nullopt;
	auto const eps = epsilon_from_c(c);
	if (!eps)
		return std::nullopt;

	sound_bounds_result res;
	if (n_sat == 0) {
		res.lower = 0.0;
		res.upper = std::nullopt;
		return res;
	}
	double const center_bits = std::log2(double(n_sat)) + double(k);
	res.lower = std::clamp(center_bits - std::log2(1.0 + *eps), 0.0, width);
	res.upper = std::clamp(center_bits - std::log2(1.0 - *eps), 0.0, width);
	return res;
}

} // namespace xmc
