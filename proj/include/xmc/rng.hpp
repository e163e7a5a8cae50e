/*-------------------------------------------------------------------------------------------------
| This file is distributed under the MIT License.
| See accompanying file /LICENSE for details.
*------------------------------------------------------------------------------------------------*/
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace xmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state)
{
	std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s)
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for (unsigned char c : s) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

} // namespace detail

/*! \brief One deterministic pseudo-random stream (xoshiro256**).
 *
 * The state is derived from a 64-bit seed and a stream name, so streams with
 * different names are decorrelated and a fixed (seed, name) pair reproduces
 * the identical sequence on every run.
 */
class random_stream {
public:
	random_stream() : random_stream(0, "") {}

	random_stream(std::uint64_t seed, std::string_view name)
	{
		std::uint64_t mix = seed ^ detail::fnv1a64(name);
		for (auto& word : state_)
			word = detail::splitmix64(mix);
	}

	std::uint64_t next_u64()
	{
		auto rotl = [](std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); };
		std::uint64_t const result = rotl(state_[1] * 5, 7) * 9;
		std::uint64_t const t = state_[1] << 17;
		state_[2] ^= state_[0];
		state_[3] ^= state_[1];
		state_[1] ^= state_[2];
		state_[0] ^= state_[3];
		state_[2] ^= t;
		state_[3] = rotl(state_[3], 45);
		return result;
	}

	bool next_bit() { return (next_u64() >> 63) != 0; }

	/*! Uniform double in [0, 1). */
	double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

	double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

	/*! Normal deviate via Box-Muller; consumes exactly two uniforms. */
	double normal(double mean, double sd)
	{
		double const u1 = 1.0 - uniform(); // (0, 1], keeps log finite
		double const u2 = uniform();
		double const r = std::sqrt(-2.0 * std::log(u1));
		return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
	}

private:
	std::uint64_t state_[4];
};

/*! \brief Seeded source of named sub-streams.
 *
 * Each named stream evolves independently; the draws taken from one stream do
 * not perturb any other. Used so that e.g. XOR draws, resampling and jitter
 * stay reproducible even when the number of draws in one of them changes.
 */
class random_source {
public:
	explicit random_source(std::uint64_t seed) : seed_(seed) {}

	std::uint64_t seed() const { return seed_; }

	random_stream& stream(std::string_view name)
	{
		auto it = streams_.find(name);
		if (it == streams_.end())
			it = streams_.emplace(std::string(name), random_stream(seed_, name)).first;
		return it->second;
	}

private:
	std::uint64_t seed_;
	std::map<std::string, random_stream, std::less<>> streams_;
};

} // namespace xmc
