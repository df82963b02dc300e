#pragma once

#include <cstdint>

#include "homsense/model.hpp"

namespace homsense {

// Deterministic 64-bit generator (SplitMix64 step function). The standard
// library distributions are implementation-defined, which would break both
// bit-identical reruns and the shared-seed coupling used by paired runs,
// so all sampling goes through this generator and explicit inversions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [2^-54, 1 - 2^-54], safe as a quantile argument
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian();

 private:
  std::uint64_t state_;
};

// Independent stream seed for (master seed, stream index); streams for
// different indices are decorrelated by double mixing.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream);

// Smallest k with P(Binomial(n, p) <= k) >= u. Exact CDF-order inversion:
// nearby p map the same u to nearby k, which is what keeps shared-seed
// paired runs coupled. Cost is O(mean) for small means and O(1) incomplete
// beta evaluations otherwise.
std::int64_t binomial_inverse_cdf(double u, std::int64_t n, double p);

struct TrinomialCounts {
  std::int64_t n0;
  std::int64_t n1;
  std::int64_t n2;
};

// Multinomial draw over (p0, p1, p2) via two sequential binomials:
// n0 first, then n2 conditioned on the remainder.
TrinomialCounts sample_outcome_counts(SplitMix64& rng, std::int64_t n_pairs,
                                      const OutcomeProbabilities& p);

}  // namespace homsense
