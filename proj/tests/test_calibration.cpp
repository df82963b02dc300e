#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "homsense/calibration.hpp"
#include "homsense/fisher.hpp"
#include "homsense/model.hpp"
#include "homsense/rng.hpp"

using namespace homsense;

namespace {

ScanRecord exact_record(double tau_as, const ModelParams& params, double n) {
  const double s = normalized_delay_from_time(tau_as, params.sigma_ps);
  const auto p = outcome_probabilities(s, params);
  ScanRecord rec;
  rec.tau_ground_truth_as = tau_as;
  rec.counts = {std::llround(n * p.p1), std::llround(n * p.p2)};
  return rec;
}

std::vector<ScanRecord> exact_scan(const ModelParams& params, double n,
                                   double lo_as, double hi_as, int points) {
  std::vector<ScanRecord> scan;
  for (int i = 0; i < points; ++i) {
    const double tau = lo_as + (hi_as - lo_as) * i / (points - 1);
    scan.push_back(exact_record(tau, params, n));
  }
  return scan;
}

CoincidenceCounts exact_far(const ModelParams& params, double n) {
  const auto p = outcome_probabilities(8.0, params);
  return {std::llround(n * p.p1), std::llround(n * p.p2)};
}

}  // namespace

TEST_CASE("loss estimate matches hand-worked ratios") {
  CHECK(estimate_gamma({640, 320}) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(estimate_gamma({100, 100}) == 0.0);
  // plateau fractions at gamma = 0.87 recovered from expected counts
  CHECK(estimate_gamma({234650, 8450}) == doctest::Approx(0.87).epsilon(1e-12));
  // clipping at both ends of the valid range
  CHECK(estimate_gamma({100, 200}) == 0.0);
  const double top = estimate_gamma({100, 0});
  CHECK(top < 1.0);
  CHECK(top == std::nextafter(1.0, 0.0));
  CHECK_THROWS_AS(estimate_gamma({0, 0}), std::domain_error);
}

TEST_CASE("pair budget inverts the detection efficiency") {
  CHECK(estimate_n({640, 320}, 0.2) == doctest::Approx(1000.0).epsilon(1e-15));
  CHECK(estimate_n({500, 500}, 0.0) == doctest::Approx(1000.0));
  CHECK_THROWS_AS(estimate_n({640, 320}, 1.0), std::domain_error);
  CHECK_THROWS_AS(estimate_n({640, 320}, -0.1), std::domain_error);
}

TEST_CASE("visibility reads the smoothed dip floor") {
  const ModelParams params(0.8, 0.0, 0.0125);
  const double n = 1e6;
  // five repeats at the dip bottom pin the moving average exactly
  std::vector<ScanRecord> scan;
  for (int i = 0; i < 5; ++i) scan.push_back(exact_record(0.0, params, n));
  for (double tau : {3000.0, 6000.0, 9000.0, 12000.0})
    scan.push_back(exact_record(tau, params, n));
  CHECK(estimate_alpha(scan, n, 0.0) == doctest::Approx(0.8).epsilon(1e-9));

  // input order does not matter
  std::vector<ScanRecord> shuffled = scan;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[2], shuffled[6]);
  CHECK(estimate_alpha(shuffled, n, 0.0) == estimate_alpha(scan, n, 0.0));

  CHECK_THROWS_AS(estimate_alpha({}, n, 0.0), std::domain_error);
  CHECK_THROWS_AS(estimate_alpha(scan, 0.0, 0.0), std::domain_error);
}

TEST_CASE("visibility clips to its physical range") {
  const double n = 1e6;
  std::vector<ScanRecord> hot;
  for (double tau : {0.0, 1.0, 2.0, 3.0, 4.0})
    hot.push_back({tau, {100, 900000}});
  CHECK(estimate_alpha(hot, n, 0.0) == 0.0);
  std::vector<ScanRecord> dark;
  for (double tau : {0.0, 1.0, 2.0, 3.0, 4.0})
    dark.push_back({tau, {100, 0}});
  CHECK(estimate_alpha(dark, n, 0.0) == 1.0);
}

TEST_CASE("smoothed floor matches a direct moving-average oracle") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n = 2e5;
  SplitMix64 rng(404);
  std::vector<ScanRecord> scan;
  for (int i = 0; i < 41; ++i) {
    const double tau = -15000.0 + 750.0 * i;
    const double s = normalized_delay_from_time(tau, params.sigma_ps);
    SplitMix64 row(derive_stream_seed(404, static_cast<std::uint64_t>(i)));
    const auto c =
        sample_outcome_counts(row, static_cast<std::int64_t>(n),
                              outcome_probabilities(s, params));
    scan.push_back({tau, {c.n1, c.n2}});
  }
  // recompute the windowed minimum directly from the sorted coincidences
  std::vector<ScanRecord> sorted = scan;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScanRecord& a, const ScanRecord& b) {
              return a.tau_ground_truth_as < b.tau_ground_truth_as;
            });
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 5 <= sorted.size(); ++i) {
    double acc = 0.0;
    for (size_t j = i; j < i + 5; ++j)
      acc += static_cast<double>(sorted[j].counts.n2);
    best = std::min(best, acc / 5.0);
  }
  const double g = 0.25;
  const double expected =
      std::clamp(1.0 - 2.0 * best / (n * (1.0 - g) * (1.0 - g)), 0.0, 1.0);
  CHECK(estimate_alpha(scan, n, g) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("width fit recovers the generator exactly from clean counts") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n = 1e15;
  const auto scan = exact_scan(params, n, -15000.0, 15000.0, 97);
  const double center = time_from_normalized_delay(
      peak_information_delay(params), params.sigma_ps);
  const auto fit = estimate_sigma(scan, 0.92, 0.25, 7.0, center);
  CHECK(fit.sigma_hat_ps == doctest::Approx(0.0125).epsilon(1e-6));
  CHECK(fit.fit_residual < 1e-6);
  CHECK(fit.window_points >= 5);
  CHECK(fit.excluded_clamped == 0);
}

TEST_CASE("width fit drops clamped inversions and reports them") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n = 1e12;
  auto scan = exact_scan(params, n, -15000.0, 15000.0, 97);
  const double center = time_from_normalized_delay(
      peak_information_delay(params), params.sigma_ps);
  // poison one in-window record so its inversion pegs at the clamp
  for (auto& rec : scan) {
    if (std::abs(rec.tau_ground_truth_as - center) < 300.0) {
      rec.counts.n2 = rec.counts.n1 + 1;
      break;
    }
  }
  const auto fit = estimate_sigma(scan, 0.92, 0.25, 7.0, center);
  CHECK(fit.excluded_clamped == 1);
  CHECK(fit.sigma_hat_ps == doctest::Approx(0.0125).epsilon(1e-4));
}

TEST_CASE("width fit rejects unusable windows") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const auto scan = exact_scan(params, 1e9, -15000.0, 15000.0, 97);
  CHECK_THROWS_AS(estimate_sigma(scan, 0.92, 0.25, 0.0, 7500.0),
                  std::domain_error);
  // window far outside the scanned range holds no points
  CHECK_THROWS_AS(estimate_sigma(scan, 0.92, 0.25, 7.0, 9.0e5),
                  std::runtime_error);
  // five records at one delay cannot pin a slope
  std::vector<ScanRecord> flat;
  for (int i = 0; i < 5; ++i) flat.push_back(exact_record(7500.0, params, 1e9));
  CHECK_THROWS_AS(estimate_sigma(flat, 0.92, 0.25, 7.0, 7500.0),
                  std::runtime_error);
}

TEST_CASE("full chain reproduces clean generator settings") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n_scan = 1e15;
  const double n_far = 1e15;
  auto scan = exact_scan(params, n_scan, -15000.0, 15000.0, 97);
  // dwell at the dip bottom pins the floor average
  for (int i = 0; i < 5; ++i) scan.push_back(exact_record(0.0, params, n_scan));
  const auto far = exact_far(params, n_far);
  const auto record = calibrate(far, scan, 7.0, n_scan / n_far);
  CHECK(record.gamma_hat == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(record.n_hat == doctest::Approx(n_far).epsilon(1e-9));
  CHECK(record.alpha_hat == doctest::Approx(0.92).epsilon(1e-9));
  CHECK(record.sigma_hat_ps == doctest::Approx(0.0125).epsilon(1e-6));
  CHECK(record.fit_residual < 1e-6);
  CHECK(record.coverage_ok);
  CHECK(record.fit_window_fs == 7.0);
  CHECK(record.window_points >= 5);
  CHECK(record.provisional_sigma_ps ==
        doctest::Approx(0.0125).epsilon(1e-3));
  CHECK(record.center_as ==
        doctest::Approx(time_from_normalized_delay(
                            peak_information_delay(params), params.sigma_ps))
            .epsilon(1e-3));

  // record order is immaterial
  std::vector<ScanRecord> shuffled = scan;
  std::mt19937 mix(5);
  std::shuffle(shuffled.begin(), shuffled.end(), mix);
  const auto again = calibrate(far, shuffled, 7.0, n_scan / n_far);
  CHECK(again.sigma_hat_ps == record.sigma_hat_ps);
  CHECK(again.alpha_hat == record.alpha_hat);
}

TEST_CASE("full chain holds up under counting noise") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const std::int64_t n_scan = 300000;
  const std::int64_t n_far = 10000000;
  std::vector<ScanRecord> scan;
  for (int i = 0; i < 97; ++i) {
    const double tau = -15000.0 + 312.5 * i;
    const double s = normalized_delay_from_time(tau, params.sigma_ps);
    SplitMix64 row(derive_stream_seed(777, static_cast<std::uint64_t>(i)));
    const auto c = sample_outcome_counts(row, n_scan,
                                         outcome_probabilities(s, params));
    scan.push_back({tau, {c.n1, c.n2}});
  }
  SplitMix64 frng(derive_stream_seed(777, 1000));
  const auto fc = sample_outcome_counts(frng, n_far,
                                        outcome_probabilities(8.0, params));
  const auto record =
      calibrate({fc.n1, fc.n2}, scan, 7.0,
                static_cast<double>(n_scan) / static_cast<double>(n_far));
  CHECK(record.gamma_hat == doctest::Approx(0.25).epsilon(0.01));
  CHECK(record.n_hat ==
        doctest::Approx(static_cast<double>(n_far)).epsilon(0.01));
  CHECK(record.alpha_hat == doctest::Approx(0.92).epsilon(0.02));
  CHECK(record.sigma_hat_ps == doctest::Approx(0.0125).epsilon(0.03));
  CHECK(record.coverage_ok);
}

TEST_CASE("loss estimate converges like root n") {
  const ModelParams params(0.9, 0.3, 1.0);
  const auto probs = outcome_probabilities(8.0, params);
  std::vector<double> log_n, log_rmse;
  int stream = 0;
  for (const double n : {1e4, 1e6, 1e8}) {
    double se = 0.0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
      SplitMix64 rng(derive_stream_seed(2121, static_cast<std::uint64_t>(stream++)));
      const auto c = sample_outcome_counts(rng, static_cast<std::int64_t>(n), probs);
      const double err = estimate_gamma({c.n1, c.n2}) - 0.3;
      se += err * err;
    }
    log_n.push_back(std::log10(n));
    log_rmse.push_back(0.5 * std::log10(se / reps));
  }
  const double xbar = (log_n[0] + log_n[1] + log_n[2]) / 3.0;
  const double ybar = (log_rmse[0] + log_rmse[1] + log_rmse[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (log_n[i] - xbar) * (log_rmse[i] - ybar);
    den += (log_n[i] - xbar) * (log_n[i] - xbar);
  }
  const double slope = num / den;
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);
}

TEST_CASE("coverage flag reports whether the scan brackets the floor") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n = 1e12;
  auto full = exact_scan(params, n, -15000.0, 15000.0, 97);
  const auto far = exact_far(params, n);
  CHECK(calibrate(far, full, 7.0, 1.0).coverage_ok);

  // one-sided scan: the smoothed minimum lands on the first sorted window
  auto onesided = exact_scan(params, n, 0.0, 15000.0, 49);
  const auto record = calibrate(far, onesided, 7.0, 1.0);
  CHECK_FALSE(record.coverage_ok);
}

TEST_CASE("chain failures carry the failing stage") {
  const ModelParams params(0.92, 0.25, 0.0125);
  const double n = 1e9;
  const auto scan = exact_scan(params, n, -15000.0, 15000.0, 97);
  try {
    calibrate({0, 0}, scan, 7.0, 1.0);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("calibrate[gamma]:", 0) == 0);
  }
  // a flat scan has no dip, the floor reads as zero visibility and the
  // peak search has nothing to work with
  std::vector<ScanRecord> flat;
  const auto plateau = outcome_probabilities(8.0, params);
  for (int i = 0; i < 20; ++i) {
    flat.push_back({-15000.0 + 1500.0 * i,
                    {std::llround(n * plateau.p1), std::llround(n * plateau.p2)}});
  }
  const auto far = exact_far(params, n);
  try {
    calibrate(far, flat, 7.0, 1.0);
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).rfind("calibrate[peak]:", 0) == 0);
  }
  CHECK_THROWS_AS(calibrate(far, scan, 7.0, 0.0), std::domain_error);
}
