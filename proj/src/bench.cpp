#include "homsense/bench.hpp"

#include <cmath>
#include <stdexcept>

#include "homsense/rng.hpp"
#include "homsense/units.hpp"

namespace homsense {

CoincidenceCounts sample_counts(double s, const ModelParams& params,
                                std::int64_t n_pairs, std::uint64_t seed) {
  if (n_pairs < 1) throw std::domain_error("n_pairs must be at least 1");
  SplitMix64 rng(seed);
  const TrinomialCounts c =
      sample_outcome_counts(rng, n_pairs, outcome_probabilities(s, params));
  return {c.n1, c.n2};
}

std::vector<double> drift_trace_as(const DriftConfig& config, int m_windows,
                                   std::uint64_t seed) {
  if (m_windows < 1) throw std::domain_error("m_windows must be at least 1");
  if (config.total_drift_fs < 0.0 || config.step_fs < 0.0) {
    throw std::domain_error("drift magnitudes must be nonnegative");
  }
  std::vector<double> trace(static_cast<std::size_t>(m_windows), 0.0);
  if (config.model == DriftModel::none) return trace;

  const double step_fs =
      config.step_fs > 0.0
          ? config.step_fs
          : config.total_drift_fs / std::sqrt(static_cast<double>(m_windows));
  if (step_fs == 0.0) return trace;

  SplitMix64 rng(derive_stream_seed(seed, 0));
  double level_fs = 0.0;
  for (int i = 0; i < m_windows; ++i) {
    level_fs += step_fs * rng.next_gaussian();
    trace[static_cast<std::size_t>(i)] = fs_to_as(level_fs);
  }
  return trace;
}

ProtocolResult run_protocol(const ModelParams& params,
                            const ProtocolConfig& protocol,
                            const DriftConfig& drift) {
  if (protocol.pairs_per_window < 1) {
    throw std::domain_error("pairs_per_window must be at least 1");
  }
  if (protocol.m_windows < 1) {
    throw std::domain_error("m_windows must be at least 1");
  }

  const std::vector<double> drift_as =
      drift_trace_as(drift, protocol.m_windows, protocol.seed);

  ProtocolResult result;
  result.expected_delta_as = protocol.delta_tau_as;
  result.periods.reserve(static_cast<std::size_t>(protocol.m_windows));
  result.cumulative_delta_as.reserve(static_cast<std::size_t>(protocol.m_windows));

  double sum_delta = 0.0;
  for (int m = 0; m < protocol.m_windows; ++m) {
    PeriodRecord rec;
    rec.drift_as = drift_as[static_cast<std::size_t>(m)];
    const double tau_out = protocol.operating_delay_as + rec.drift_as;
    const double tau_in = tau_out + protocol.delta_tau_as;

    const auto window = [&](double tau_as, int w) {
      const std::uint64_t stream = 1 + 2 * static_cast<std::uint64_t>(m) +
                                   static_cast<std::uint64_t>(w);
      const CoincidenceCounts counts = sample_counts(
          normalized_delay_from_time(tau_as, params.sigma_ps), params,
          protocol.pairs_per_window,
          derive_stream_seed(protocol.seed, stream));
      return mle_estimate(counts, params, protocol.estimator);
    };
    rec.out_estimate = window(tau_out, 0);
    rec.in_estimate = window(tau_in, 1);

    const bool out_ok = rec.out_estimate.status == EstimateStatus::interior;
    const bool in_ok = rec.in_estimate.status == EstimateStatus::interior;
    result.clamped_windows += (out_ok ? 0 : 1) + (in_ok ? 0 : 1);
    if (out_ok && in_ok) {
      const DifferentialEstimate diff =
          differential_estimate(rec.in_estimate, rec.out_estimate);
      rec.valid = true;
      rec.delta_tau_as = diff.delta_tau_as;
      rec.variance_as2 = diff.variance_as2;
      ++result.valid_periods;
      sum_delta += diff.delta_tau_as;
      result.cumulative_delta_as.push_back(
          sum_delta / static_cast<double>(result.valid_periods));
    }
    result.periods.push_back(rec);
  }

  // total windows = 2 * m_windows, so > 50% clamped means clamped > m_windows
  if (result.clamped_windows > protocol.m_windows) {
    throw std::runtime_error(
        "run_protocol: more than half of all windows clamped; move the "
        "operating delay");
  }
  if (result.valid_periods == 0) {
    throw std::runtime_error("run_protocol: no valid periods");
  }

  result.measured_delta_as = sum_delta / result.valid_periods;
  result.accuracy_as =
      std::abs(result.measured_delta_as - result.expected_delta_as);

  double ss = 0.0;
  for (const PeriodRecord& rec : result.periods) {
    if (!rec.valid) continue;
    const double d = rec.delta_tau_as - result.measured_delta_as;
    ss += d * d;
  }
  const double k = static_cast<double>(result.valid_periods);
  result.per_window_precision_as = k > 1.0 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  result.pooled_precision_as = result.per_window_precision_as / std::sqrt(k);

  const double n = static_cast<double>(protocol.pairs_per_window);
  const double var_out = crb_variance_as2(
      normalized_delay_from_time(protocol.operating_delay_as, params.sigma_ps),
      params, n);
  const double var_in = crb_variance_as2(
      normalized_delay_from_time(
          protocol.operating_delay_as + protocol.delta_tau_as, params.sigma_ps),
      params, n);
  result.crb_per_window_precision_as = std::sqrt(var_out + var_in);
  result.crb_pooled_precision_as =
      pooled_precision_as(var_out + var_in, result.valid_periods);
  return result;
}

WedgeDelay wedge_delay(double translation_um, const WedgeGeometry& geometry) {
  if (!(geometry.conversion_nm_per_um > 0.0) ||
      !(geometry.refractive_index > 0.0)) {
    throw std::domain_error("wedge geometry must have positive values");
  }
  const double path_nm = translation_um * geometry.conversion_nm_per_um;
  WedgeDelay delay;
  delay.delta_tau_as = nm_to_as(path_nm);
  delay.glass_length_nm = path_nm / geometry.refractive_index;
  return delay;
}

}  // namespace homsense
