#pragma once

#include <cstdint>

#include "homsense/model.hpp"

namespace homsense {

struct CoincidenceCounts {
  std::int64_t n1 = 0;  // singles-pattern outcomes (one detector fired)
  std::int64_t n2 = 0;  // coincidences
};

enum class EstimateStatus { interior, clamped_at_zero, clamped_at_smax };
enum class Branch { positive, negative };

struct DelayEstimate {
  double s_hat = 0.0;
  double tau_hat_as = 0.0;
  double variance_as2 = 0.0;  // CRB plug-in at s_hat
  Branch branch = Branch::positive;
  EstimateStatus status = EstimateStatus::interior;
};

struct EstimatorConfig {
  double s_max = 10.0;  // clamp for the inverted magnitude
};

// Inverts the coincidence fraction for |tau|/sigma, resolving the sign by
// `branch`. Counts that land outside the model's reachable fraction clamp to
// the nearest boundary and are flagged in `status`.
DelayEstimate mle_estimate(const CoincidenceCounts& counts,
                           const ModelParams& params,
                           const EstimatorConfig& config = {},
                           Branch branch = Branch::positive);

// Cramer-Rao variance bound for an unbiased delay estimate from n_pairs
// emitted pairs, in as^2. Infinite where the information vanishes.
double crb_variance_as2(double s, const ModelParams& params, double n_pairs);

struct DifferentialEstimate {
  double delta_tau_as = 0.0;
  double variance_as2 = 0.0;  // sum of the two sides' plug-in variances
};

// in-window minus out-window delay. Throws if either side clamped.
DifferentialEstimate differential_estimate(const DelayEstimate& in,
                                           const DelayEstimate& out);

// Standard error of the mean of m independent per-period estimates that each
// carry variance variance_as2.
double pooled_precision_as(double variance_as2, int m_periods);

struct BiasDiagnostic {
  double mean_bias_as = 0.0;       // interior trials only
  double bias_std_error_as = 0.0;  // standard error of that mean
  double empirical_variance_as2 = 0.0;
  double crb_variance_as2 = 0.0;  // at the true s
  int interior_trials = 0;
  int clamped_trials = 0;
};

// Monte Carlo check of estimator bias at a fixed operating point. Each trial
// draws one n-pair outcome triple on its own derived stream.
BiasDiagnostic bias_diagnostic(double true_s, const ModelParams& params,
                               std::int64_t n_pairs, int trials,
                               std::uint64_t seed);

}  // namespace homsense
