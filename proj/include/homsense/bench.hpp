#pragma once

#include <cstdint>
#include <vector>

#include "homsense/estimation.hpp"
#include "homsense/model.hpp"

namespace homsense {

enum class DriftModel { none, random_walk };

struct DriftConfig {
  DriftModel model = DriftModel::none;
  double total_drift_fs = 0.0;  // target RMS of the final excursion
  double step_fs = 0.0;         // explicit per-period step scale; 0 derives it
};

struct ProtocolConfig {
  std::int64_t pairs_per_window = 0;
  int m_windows = 0;  // switch periods; each runs one out and one in window
  double delta_tau_as = 0.0;      // true in-minus-out separation
  double operating_delay_as = 0.0;  // nominal out-window delay
  double switch_period_ms = 100.0;  // informational
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
};

struct WedgeGeometry {
  double conversion_nm_per_um = 17.0;  // optical path change per um of travel
  double refractive_index = 1.5;
};

struct WedgeDelay {
  double delta_tau_as = 0.0;
  double glass_length_nm = 0.0;
};

struct PeriodRecord {
  double drift_as = 0.0;
  DelayEstimate out_estimate;
  DelayEstimate in_estimate;
  bool valid = false;           // both windows interior
  double delta_tau_as = 0.0;    // in minus out, when valid
  double variance_as2 = 0.0;    // plug-in differential variance, when valid
};

struct ProtocolResult {
  double measured_delta_as = 0.0;  // mean of valid per-period differences
  double expected_delta_as = 0.0;
  double accuracy_as = 0.0;  // |measured - expected|
  double per_window_precision_as = 0.0;  // empirical s.d. of the differences
  double pooled_precision_as = 0.0;      // that s.d. / sqrt(valid periods)
  double crb_per_window_precision_as = 0.0;  // model-predicted, true params
  double crb_pooled_precision_as = 0.0;
  int valid_periods = 0;
  int clamped_windows = 0;
  std::vector<PeriodRecord> periods;
  std::vector<double> cumulative_delta_as;  // running mean over valid periods
};

// One window's counts at normalized delay s; the no-click outcomes are
// discarded. Deterministic in (s, params, n_pairs, seed); O(1) in n_pairs.
CoincidenceCounts sample_counts(double s, const ModelParams& params,
                                std::int64_t n_pairs, std::uint64_t seed);

// Additive per-period delay offsets in attoseconds. Both windows of a period
// see the same offset. The random walk's step s.d. is step_fs when set,
// otherwise total_drift_fs/sqrt(m) so the final excursion RMS matches
// total_drift_fs.
std::vector<double> drift_trace_as(const DriftConfig& config, int m_windows,
                                   std::uint64_t seed);

// Simulates the in/out switching protocol: per period, one window at the
// operating delay and one displaced by delta_tau_as, both drift-shifted,
// each inverted by mle_estimate, differenced, then pooled. Aborts if more
// than half of all windows clamp.
ProtocolResult run_protocol(const ModelParams& params,
                            const ProtocolConfig& protocol,
                            const DriftConfig& drift);

// Wedge-pair translation to optical delay and equivalent glass length.
WedgeDelay wedge_delay(double translation_um, const WedgeGeometry& geometry = {});

}  // namespace homsense
