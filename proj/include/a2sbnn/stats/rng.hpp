#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace a2sbnn::stats {

// Splittable 64-bit generator (SplitMix64 family). Each (seed, stream_id)
// pair selects its own starting state and its own odd increment, so streams
// never share state and a stream's sequence is a pure function of the pair.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform();

  // Standard normal via inverse-CDF transform of one uniform.
  double normal();

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Derive an independent child stream (used for per-task substreams).
  RngStream split(std::uint64_t child_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
  std::uint64_t gamma_;
};

std::vector<double> sample_uniform(RngStream& rng, std::size_t n);
std::vector<double> sample_normal(RngStream& rng, std::size_t n);

// Student-t(nu) draws as Z / sqrt(chi2_nu / nu). Throws DomainError for
// nu <= 0 or n == 0.
std::vector<double> sample_student_t(RngStream& rng, double nu, std::size_t n);

// k distinct indices drawn uniformly from [0, n) (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(RngStream& rng,
                                                    std::size_t n,
                                                    std::size_t k);

}  // namespace a2sbnn::stats
