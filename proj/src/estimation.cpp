#include "homsense/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "homsense/fisher.hpp"
#include "homsense/rng.hpp"
#include "homsense/units.hpp"

namespace homsense {

DelayEstimate mle_estimate(const CoincidenceCounts& counts,
                           const ModelParams& params,
                           const EstimatorConfig& config, Branch branch) {
  if (counts.n1 < 0 || counts.n2 < 0) {
    throw std::domain_error("counts must be nonnegative");
  }
  if (counts.n1 + counts.n2 == 0) {
    throw std::domain_error("mle_estimate needs at least one detected pair");
  }
  if (params.alpha == 0.0) {
    throw std::domain_error("alpha = 0 leaves the counts independent of the delay");
  }

  DelayEstimate est;
  est.branch = branch;

  // The detected-pair fraction n2/(n1+n2) estimates p2/(p1+p2), whose
  // denominator does not depend on s. Inverting it for exp(-s^2):
  //   alpha/exp_hat = alpha*(n1+n2) / (n1 - n2*(1+3g)/(1-g))
  const double r = (1.0 + 3.0 * params.gamma) / (1.0 - params.gamma);
  const double d = static_cast<double>(counts.n1) - static_cast<double>(counts.n2) * r;
  if (d <= 0.0) {
    // more coincidences than the model can produce at any s
    est.s_hat = config.s_max;
    est.status = EstimateStatus::clamped_at_smax;
  } else {
    const double a = params.alpha * static_cast<double>(counts.n1 + counts.n2) / d;
    if (a <= 1.0) {
      // fraction at or below the s = 0 floor
      est.s_hat = 0.0;
      est.status = EstimateStatus::clamped_at_zero;
    } else {
      const double s = std::sqrt(std::log(a));
      if (s >= config.s_max) {
        est.s_hat = config.s_max;
        est.status = EstimateStatus::clamped_at_smax;
      } else {
        est.s_hat = s;
        est.status = EstimateStatus::interior;
      }
    }
  }

  const double sign = branch == Branch::positive ? 1.0 : -1.0;
  est.tau_hat_as = sign * time_from_normalized_delay(est.s_hat, params.sigma_ps);

  const double n_hat = static_cast<double>(counts.n1 + counts.n2) /
                       (1.0 - params.gamma * params.gamma);
  est.variance_as2 = crb_variance_as2(est.s_hat, params, n_hat);
  return est;
}

double crb_variance_as2(double s, const ModelParams& params, double n_pairs) {
  if (!(n_pairs > 0.0)) {
    throw std::domain_error("n_pairs must be positive");
  }
  const auto f = fisher_information(s, params);
  if (!f || *f == 0.0) return std::numeric_limits<double>::infinity();
  const double var_ps2 = 1.0 / (n_pairs * *f);
  return var_ps2 * kAsPerPs * kAsPerPs;
}

DifferentialEstimate differential_estimate(const DelayEstimate& in,
                                           const DelayEstimate& out) {
  if (in.status != EstimateStatus::interior ||
      out.status != EstimateStatus::interior) {
    const char* side = in.status != EstimateStatus::interior ? "in" : "out";
    throw std::runtime_error(std::string("differential_estimate: ") + side +
                             "-window estimate is clamped");
  }
  DifferentialEstimate diff;
  diff.delta_tau_as = in.tau_hat_as - out.tau_hat_as;
  diff.variance_as2 = in.variance_as2 + out.variance_as2;
  return diff;
}

double pooled_precision_as(double variance_as2, int m_periods) {
  if (m_periods <= 0) {
    throw std::domain_error("m_periods must be positive");
  }
  return std::sqrt(variance_as2 / static_cast<double>(m_periods));
}

BiasDiagnostic bias_diagnostic(double true_s, const ModelParams& params,
                               std::int64_t n_pairs, int trials,
                               std::uint64_t seed) {
  if (n_pairs <= 0) throw std::domain_error("n_pairs must be positive");
  if (trials <= 0) throw std::domain_error("trials must be positive");

  const double true_tau_as = time_from_normalized_delay(true_s, params.sigma_ps);
  const OutcomeProbabilities probs = outcome_probabilities(true_s, params);

  std::vector<double> residuals_as;
  residuals_as.reserve(static_cast<std::size_t>(trials));
  int clamped = 0;
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng(derive_stream_seed(seed, static_cast<std::uint64_t>(t)));
    const TrinomialCounts c = sample_outcome_counts(rng, n_pairs, probs);
    const DelayEstimate est =
        mle_estimate(CoincidenceCounts{c.n1, c.n2}, params);
    if (est.status == EstimateStatus::interior) {
      residuals_as.push_back(est.tau_hat_as - true_tau_as);
    } else {
      ++clamped;
    }
  }

  BiasDiagnostic diag;
  diag.interior_trials = static_cast<int>(residuals_as.size());
  diag.clamped_trials = clamped;
  diag.crb_variance_as2 =
      crb_variance_as2(true_s, params, static_cast<double>(n_pairs));
  if (residuals_as.empty()) return diag;

  double sum = 0.0;
  for (double x : residuals_as) sum += x;
  const double mean = sum / static_cast<double>(residuals_as.size());
  double ss = 0.0;
  for (double x : residuals_as) ss += (x - mean) * (x - mean);
  const double k = static_cast<double>(residuals_as.size());
  const double var = k > 1.0 ? ss / (k - 1.0) : 0.0;

  diag.mean_bias_as = mean;
  diag.bias_std_error_as = std::sqrt(var / k);
  diag.empirical_variance_as2 = var;
  return diag;
}

}  // namespace homsense
