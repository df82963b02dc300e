#include "homsense/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "homsense/fisher.hpp"
#include "homsense/units.hpp"

namespace homsense {

namespace {

std::vector<ScanRecord> sorted_by_delay(std::vector<ScanRecord> scan) {
  std::sort(scan.begin(), scan.end(),
            [](const ScanRecord& a, const ScanRecord& b) {
              if (a.tau_ground_truth_as != b.tau_ground_truth_as) {
                return a.tau_ground_truth_as < b.tau_ground_truth_as;
              }
              if (a.counts.n2 != b.counts.n2) return a.counts.n2 < b.counts.n2;
              return a.counts.n1 < b.counts.n1;
            });
  return scan;
}

struct FloorLocation {
  double min_average = 0.0;
  std::size_t position = 0;
  std::size_t positions = 0;
};

FloorLocation coincidence_floor(const std::vector<ScanRecord>& sorted) {
  const std::size_t k = sorted.size();
  const std::size_t w = std::min<std::size_t>(5, k);
  FloorLocation loc;
  loc.positions = k - w + 1;
  double best = std::numeric_limits<double>::infinity();
  double window_sum = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    window_sum += static_cast<double>(sorted[i].counts.n2);
  }
  for (std::size_t pos = 0;; ++pos) {
    const double avg = window_sum / static_cast<double>(w);
    if (avg < best) {
      best = avg;
      loc.position = pos;
    }
    if (pos + w >= k) break;
    window_sum += static_cast<double>(sorted[pos + w].counts.n2) -
                  static_cast<double>(sorted[pos].counts.n2);
  }
  loc.min_average = best;
  return loc;
}

// Scale-free positive-branch delay magnitude for one record, or nothing if
// the inversion clamps (the point is not on the vee).
std::optional<double> straightened_delay(const ScanRecord& rec, double alpha,
                                         double gamma) {
  if (rec.counts.n1 + rec.counts.n2 == 0) return std::nullopt;
  const ModelParams params(alpha, gamma, 1.0);
  const DelayEstimate est = mle_estimate(rec.counts, params);
  if (est.status != EstimateStatus::interior) return std::nullopt;
  return est.s_hat;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double relative_rms_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double k = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw std::runtime_error("sigma fit: degenerate delay grid in window");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0, ss_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
    ss_y += y[i] * y[i];
  }
  fit.relative_rms_residual = ss_y > 0.0 ? std::sqrt(ss_res / ss_y) : 0.0;
  return fit;
}

}  // namespace

double estimate_gamma(const CoincidenceCounts& far_counts) {
  const double n1 = static_cast<double>(far_counts.n1);
  const double n2 = static_cast<double>(far_counts.n2);
  const double denom = n1 + 3.0 * n2;
  if (denom == 0.0) {
    throw std::domain_error("estimate_gamma: degenerate counts (N1+3*N2 = 0)");
  }
  const double g = (n1 - n2) / denom;
  return std::clamp(g, 0.0, std::nextafter(1.0, 0.0));
}

double estimate_n(const CoincidenceCounts& far_counts, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::domain_error("estimate_n: gamma must be in [0, 1)");
  }
  const double detected =
      static_cast<double>(far_counts.n1) + static_cast<double>(far_counts.n2);
  return detected / (1.0 - gamma * gamma);
}

double estimate_alpha(const std::vector<ScanRecord>& scan, double n,
                      double gamma) {
  if (scan.empty()) throw std::domain_error("estimate_alpha: empty scan");
  if (!(n > 0.0)) throw std::domain_error("estimate_alpha: n must be positive");
  const auto sorted = sorted_by_delay(scan);
  const FloorLocation floor = coincidence_floor(sorted);
  const double t = 1.0 - gamma;
  const double a = 1.0 - 2.0 * floor.min_average / (n * t * t);
  return std::clamp(a, 0.0, 1.0);
}

SigmaFit estimate_sigma(const std::vector<ScanRecord>& scan, double alpha,
                        double gamma, double window_fs, double center_as) {
  if (!(window_fs > 0.0)) {
    throw std::domain_error("estimate_sigma: window_fs must be positive");
  }
  const double half = fs_to_as(window_fs) / 2.0;
  std::vector<double> tau, s_tilde;
  int excluded = 0;
  for (const ScanRecord& rec : scan) {
    if (std::abs(rec.tau_ground_truth_as - center_as) > half) continue;
    const auto s = straightened_delay(rec, alpha, gamma);
    if (!s) {
      ++excluded;
      continue;
    }
    tau.push_back(rec.tau_ground_truth_as);
    s_tilde.push_back(*s);
  }
  if (tau.size() < 5) {
    throw std::runtime_error(
        "estimate_sigma: fewer than 5 usable points in the fit window (" +
        std::to_string(tau.size()) + ")");
  }
  const LineFit fit = fit_line(tau, s_tilde);
  if (!(fit.slope > 0.0)) {
    throw std::runtime_error(
        "estimate_sigma: non-positive vee slope; window off the positive branch");
  }
  SigmaFit result;
  result.sigma_hat_ps = as_to_ps(1.0 / fit.slope);
  result.fit_residual = fit.relative_rms_residual;
  result.window_points = static_cast<int>(tau.size());
  result.excluded_clamped = excluded;
  return result;
}

CalibrationRecord calibrate(const CoincidenceCounts& far_counts,
                            const std::vector<ScanRecord>& scan,
                            double window_fs, double pairs_ratio) {
  if (!(pairs_ratio > 0.0)) {
    throw std::domain_error("calibrate: pairs_ratio must be positive");
  }
  CalibrationRecord rec;
  rec.fit_window_fs = window_fs;

  try {
    rec.gamma_hat = estimate_gamma(far_counts);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibrate[gamma]: ") + e.what());
  }
  rec.n_hat = estimate_n(far_counts, rec.gamma_hat);
  const double n_per_record = rec.n_hat * pairs_ratio;

  try {
    rec.alpha_hat = estimate_alpha(scan, n_per_record, rec.gamma_hat);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibrate[alpha]: ") + e.what());
  }

  double s_star = 0.0;
  try {
    s_star = peak_information_delay(ModelParams(rec.alpha_hat, rec.gamma_hat, 1.0));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibrate[peak]: ") + e.what());
  }

  // Bootstrap the window center: a provisional sigma from a clamp-free band
  // of the positive branch, then two refinement passes at +s*·sigma.
  const auto sorted = sorted_by_delay(scan);
  try {
    std::vector<double> tau, s_tilde;
    for (const ScanRecord& r : sorted) {
      if (r.tau_ground_truth_as <= 0.0) continue;
      const auto s = straightened_delay(r, rec.alpha_hat, rec.gamma_hat);
      if (!s) continue;
      if (*s < 0.3 || *s > 1.1) continue;
      tau.push_back(r.tau_ground_truth_as);
      s_tilde.push_back(*s);
    }
    if (tau.size() < 5) {
      tau.clear();
      s_tilde.clear();
      for (const ScanRecord& r : sorted) {
        if (r.tau_ground_truth_as <= 0.0) continue;
        const auto s = straightened_delay(r, rec.alpha_hat, rec.gamma_hat);
        if (!s) continue;
        tau.push_back(r.tau_ground_truth_as);
        s_tilde.push_back(*s);
      }
    }
    if (tau.size() < 2) {
      throw std::runtime_error("no usable positive-branch points");
    }
    const LineFit provisional = fit_line(tau, s_tilde);
    if (!(provisional.slope > 0.0)) {
      throw std::runtime_error("non-positive provisional vee slope");
    }
    rec.provisional_sigma_ps = as_to_ps(1.0 / provisional.slope);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibrate[sigma-bootstrap]: ") + e.what());
  }

  double sigma_ps = rec.provisional_sigma_ps;
  SigmaFit fit;
  try {
    for (int pass = 0; pass < 2; ++pass) {
      rec.center_as = time_from_normalized_delay(s_star, sigma_ps);
      fit = estimate_sigma(scan, rec.alpha_hat, rec.gamma_hat, window_fs,
                           rec.center_as);
      sigma_ps = fit.sigma_hat_ps;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("calibrate[sigma]: ") + e.what());
  }
  rec.sigma_hat_ps = fit.sigma_hat_ps;
  rec.fit_residual = fit.fit_residual;
  rec.window_points = fit.window_points;
  rec.excluded_clamped = fit.excluded_clamped;

  const FloorLocation floor = coincidence_floor(sorted);
  rec.coverage_ok = floor.positions >= 3 && floor.position != 0 &&
                    floor.position != floor.positions - 1;
  return rec;
}

}  // namespace homsense
