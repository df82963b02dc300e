#include "homsense/rng.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <stdexcept>

#include "homsense/special.hpp"

namespace homsense {

double SplitMix64::next_gaussian() { return inverse_normal_cdf(next_unit()); }

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  SplitMix64 mixer(master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
  mixer.next_u64();
  return mixer.next_u64();
}

namespace {

// P(Binomial(n, p) <= k) through the regularized incomplete beta function.
double binomial_cdf(std::int64_t k, std::int64_t n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return boost::math::ibeta(static_cast<double>(n - k), static_cast<double>(k + 1),
                            1.0 - p);
}

std::int64_t invert_by_forward_scan(double u, std::int64_t n, double p) {
  const double odds = p / (1.0 - p);
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cdf = pmf;
  std::int64_t k = 0;
  while (cdf < u && k < n) {
    pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
    cdf += pmf;
    ++k;
    if (pmf == 0.0) break;  // underflowed tail; u is effectively 1
  }
  return k;
}

std::int64_t invert_by_beta_walk(double u, std::int64_t n, double p) {
  const double mean = static_cast<double>(n) * p;
  const double sd = std::sqrt(mean * (1.0 - p));
  const double z = inverse_normal_cdf(u);
  std::int64_t k = static_cast<std::int64_t>(std::llround(mean + z * sd));
  if (k < 0) k = 0;
  if (k > n) k = n;
  while (binomial_cdf(k, n, p) < u) ++k;
  while (k > 0 && binomial_cdf(k - 1, n, p) >= u) --k;
  return k;
}

}  // namespace

std::int64_t binomial_inverse_cdf(double u, std::int64_t n, double p) {
  if (n < 0) throw std::domain_error("binomial_inverse_cdf: n < 0");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial_inverse_cdf: p outside [0, 1]");
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("binomial_inverse_cdf: u outside [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (u >= 1.0) return n;

  const double mean = static_cast<double>(n) * p;
  if (n <= 64 || mean <= 32.0) return invert_by_forward_scan(u, n, p);
  return invert_by_beta_walk(u, n, p);
}

TrinomialCounts sample_outcome_counts(SplitMix64& rng, std::int64_t n_pairs,
                                      const OutcomeProbabilities& p) {
  if (n_pairs < 0) throw std::domain_error("sample_outcome_counts: n_pairs < 0");
  const double u0 = rng.next_unit();
  const double u2 = rng.next_unit();
  TrinomialCounts c{};
  c.n0 = binomial_inverse_cdf(u0, n_pairs, p.p0);
  const double rest = 1.0 - p.p0;
  const double p2_cond = rest > 0.0 ? p.p2 / rest : 0.0;
  c.n2 = binomial_inverse_cdf(u2, n_pairs - c.n0, p2_cond);
  c.n1 = n_pairs - c.n0 - c.n2;
  return c;
}

}  // namespace homsense
