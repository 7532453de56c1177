#include "a2sbnn/stats/rng.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "a2sbnn/errors.hpp"
#include "a2sbnn/stats/special.hpp"

namespace a2sbnn::stats {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Variant-13 mixer, used for increments so they differ from state mixing.
std::uint64_t mix64_variant(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0x62A9D9ED799705F5ULL;
  z = (z ^ (z >> 28)) * 0xCB24D0A5C88C35B3ULL;
  return z ^ (z >> 32);
}

// Odd increment with enough bit transitions (as in SplittableRandom).
std::uint64_t mix_gamma(std::uint64_t z) {
  z = mix64_variant(z) | 1ULL;
  const int transitions = std::popcount(z ^ (z >> 1));
  return transitions < 24 ? z ^ 0xAAAAAAAAAAAAAAAAULL : z;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  const std::uint64_t key = mix64(seed + kGolden) ^ mix64_variant(stream_id + 2 * kGolden);
  state_ = mix64(key);
  gamma_ = mix_gamma(key + kGolden + mix64(stream_id));
}

std::uint64_t RngStream::next_u64() {
  state_ += gamma_;
  return mix64(state_);
}

double RngStream::uniform() {
  // 53 random bits centred in their cell: (k + 0.5) / 2^53 lies in (0, 1).
  const std::uint64_t k = next_u64() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return inv_normal_cdf(uniform()); }

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("RngStream::below: bound must be positive");
  // Lemire-style rejection keeps the result exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

RngStream RngStream::split(std::uint64_t child_id) const {
  return RngStream(mix64(seed_ ^ mix64_variant(stream_id_)), child_id);
}

std::vector<double> sample_uniform(RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform();
  return out;
}

std::vector<double> sample_normal(RngStream& rng, std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.normal();
  return out;
}

std::vector<double> sample_student_t(RngStream& rng, double nu, std::size_t n) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw DomainError("sample_student_t: degrees of freedom must be positive");
  }
  if (n == 0) throw DomainError("sample_student_t: sample count must be >= 1");

  const bool integral = nu == std::floor(nu) && nu <= 64.0;
  const boost::math::chi_squared_distribution<double> chi2(nu);

  std::vector<double> out(n);
  for (auto& v : out) {
    const double z = rng.normal();
    double chi = 0.0;
    if (integral) {
      for (int k = 0; k < static_cast<int>(nu); ++k) {
        const double g = rng.normal();
        chi += g * g;
      }
    } else {
      chi = boost::math::quantile(chi2, rng.uniform());
    }
    v = z / std::sqrt(chi / nu);
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(RngStream& rng,
                                                    std::size_t n,
                                                    std::size_t k) {
  if (k > n) throw DomainError("sample_without_replacement: k exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace a2sbnn::stats
