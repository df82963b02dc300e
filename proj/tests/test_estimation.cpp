#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "homsense/estimation.hpp"
#include "homsense/fisher.hpp"
#include "homsense/model.hpp"

using namespace homsense;

TEST_CASE("inversion recovers the hand-worked interior point") {
  // fraction algebra done offline: r = 2, D = 600, A = 1.6,
  // s = sqrt(ln 1.6)
  const ModelParams params(0.8, 0.2, 1.0);
  const auto est = mle_estimate({1000, 200}, params);
  CHECK(est.status == EstimateStatus::interior);
  CHECK(est.branch == Branch::positive);
  CHECK(est.s_hat == doctest::Approx(0.6855681069344866).epsilon(1e-14));
  CHECK(est.tau_hat_as == doctest::Approx(685568.1069344865).epsilon(1e-14));

  // plug-in variance is the CRB at the estimate with the recovered budget
  const double n_hat = 1200.0 / (1.0 - 0.2 * 0.2);
  CHECK(est.variance_as2 ==
        doctest::Approx(crb_variance_as2(est.s_hat, params, n_hat))
            .epsilon(1e-12));
}

TEST_CASE("negative branch mirrors the delay") {
  const ModelParams params(0.8, 0.2, 1.0);
  const auto pos = mle_estimate({1000, 200}, params, {}, Branch::positive);
  const auto neg = mle_estimate({1000, 200}, params, {}, Branch::negative);
  CHECK(neg.s_hat == pos.s_hat);
  CHECK(neg.tau_hat_as == -pos.tau_hat_as);
  CHECK(neg.variance_as2 == pos.variance_as2);
  CHECK(neg.branch == Branch::negative);
}

TEST_CASE("counts outside the reachable fraction clamp and say so") {
  const ModelParams params(0.8, 0.0, 1.0);
  // coincidence fraction above the far-delay plateau: A < 1
  const auto zero = mle_estimate({950, 50}, params);
  CHECK(zero.status == EstimateStatus::clamped_at_zero);
  CHECK(zero.s_hat == 0.0);
  CHECK(zero.tau_hat_as == 0.0);

  // more coincidences than singles-pattern counts: D <= 0
  const auto smax = mle_estimate({100, 200}, params);
  CHECK(smax.status == EstimateStatus::clamped_at_smax);
  CHECK(smax.s_hat == 10.0);
  CHECK(smax.tau_hat_as == doctest::Approx(10.0e6));

  // finite inversion past a tightened clamp: A = 2000001, s = 3.809
  const ModelParams unit(1.0, 0.0, 1.0);
  const EstimatorConfig tight{2.0};
  const auto capped = mle_estimate({1000001, 1000000}, unit, tight);
  CHECK(capped.status == EstimateStatus::clamped_at_smax);
  CHECK(capped.s_hat == 2.0);
  const auto open = mle_estimate({1000001, 1000000}, unit);
  CHECK(open.status == EstimateStatus::interior);
  CHECK(open.s_hat == doctest::Approx(3.8090232656842744).epsilon(1e-13));
}

TEST_CASE("estimator rejects unusable inputs") {
  const ModelParams params(0.8, 0.2, 1.0);
  CHECK_THROWS_AS(mle_estimate({-1, 5}, params), std::domain_error);
  CHECK_THROWS_AS(mle_estimate({5, -1}, params), std::domain_error);
  CHECK_THROWS_AS(mle_estimate({0, 0}, params), std::domain_error);
  const ModelParams blind(0.0, 0.2, 1.0);
  CHECK_THROWS_AS(mle_estimate({10, 10}, blind), std::domain_error);
}

TEST_CASE("noise-free counts invert back to the operating point") {
  // expected counts at 1e15 pairs, rounded to integers offline
  const ModelParams params(0.87, 0.06, 0.092);
  const auto est = mle_estimate({757273279859730, 239126720140270}, params);
  CHECK(est.status == EstimateStatus::interior);
  CHECK(est.s_hat == doctest::Approx(0.8).epsilon(1e-9));
  const double expected_tau_as = time_from_normalized_delay(0.8, 0.092);
  CHECK(est.tau_hat_as == doctest::Approx(expected_tau_as).epsilon(1e-9));
}

TEST_CASE("bound scales inversely with the pair budget") {
  const ModelParams params(0.9, 0.1, 0.05);
  const double v1 = crb_variance_as2(0.7, params, 1.0e5);
  const double v2 = crb_variance_as2(0.7, params, 2.0e5);
  CHECK(v1 == doctest::Approx(2.0 * v2).epsilon(1e-14));
  CHECK(v1 > 0.0);

  // where the information vanishes the bound blows up
  CHECK(crb_variance_as2(0.0, params, 1.0e5) ==
        std::numeric_limits<double>::infinity());
  const ModelParams unit(1.0, 0.0, 0.05);
  CHECK(crb_variance_as2(0.0, unit, 1.0e5) ==
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(crb_variance_as2(0.7, params, 0.0), std::domain_error);
  CHECK_THROWS_AS(crb_variance_as2(0.7, params, -5.0), std::domain_error);
}

TEST_CASE("bound value agrees with a direct evaluation") {
  const ModelParams params(0.63, 0.0, 0.033);
  const double s = 0.64;
  const double n = 4.0e8;
  const auto f_tau = fisher_information(s, params);  // ps^-2 per pair
  REQUIRE(f_tau.has_value());
  const double expect_as2 = 1.0 / (n * *f_tau) * 1e12;
  CHECK(crb_variance_as2(s, params, n) ==
        doctest::Approx(expect_as2).epsilon(1e-14));
}

TEST_CASE("differential estimate subtracts windows and adds variances") {
  DelayEstimate in;
  in.tau_hat_as = 125.0;
  in.variance_as2 = 900.0;
  DelayEstimate out;
  out.tau_hat_as = 100.0;
  out.variance_as2 = 1600.0;
  const auto diff = differential_estimate(in, out);
  CHECK(diff.delta_tau_as == doctest::Approx(25.0));
  CHECK(diff.variance_as2 == doctest::Approx(2500.0));

  DelayEstimate bad = out;
  bad.status = EstimateStatus::clamped_at_zero;
  CHECK_THROWS_AS(differential_estimate(in, bad), std::runtime_error);
  CHECK_THROWS_AS(differential_estimate(bad, out), std::runtime_error);
}

TEST_CASE("pooling follows the square-root law") {
  CHECK(pooled_precision_as(600.0 * 600.0, 10000) == doctest::Approx(6.0));
  CHECK(pooled_precision_as(100.0, 1) == doctest::Approx(10.0));
  CHECK_THROWS_AS(pooled_precision_as(100.0, 0), std::domain_error);
  CHECK_THROWS_AS(pooled_precision_as(100.0, -3), std::domain_error);
}

TEST_CASE("monte carlo variance saturates the bound at the dip shoulder") {
  const ModelParams params(0.85, 0.1, 0.05);
  const double true_s = 0.8;
  const auto diag = bias_diagnostic(true_s, params, 100000, 500, 91);
  CHECK(diag.clamped_trials == 0);
  CHECK(diag.interior_trials == 500);
  CHECK(std::abs(diag.mean_bias_as) < 3.0 * diag.bias_std_error_as);
  const double ratio = diag.empirical_variance_as2 / diag.crb_variance_as2;
  CHECK(ratio > 0.9);
  CHECK(ratio < 1.3);
  CHECK(diag.crb_variance_as2 ==
        doctest::Approx(crb_variance_as2(true_s, params, 100000.0)));
}

TEST_CASE("starved budgets clamp some trials") {
  const ModelParams params(0.85, 0.1, 0.05);
  const auto diag = bias_diagnostic(0.15, params, 100, 400, 17);
  CHECK(diag.clamped_trials > 0);
  CHECK(diag.interior_trials + diag.clamped_trials == 400);
  CHECK_THROWS_AS(bias_diagnostic(0.8, params, 0, 10, 1), std::domain_error);
  CHECK_THROWS_AS(bias_diagnostic(0.8, params, 100, 0, 1), std::domain_error);
}

TEST_CASE("diagnostic replays bit for bit under the same seed") {
  const ModelParams params(0.85, 0.1, 0.05);
  const auto a = bias_diagnostic(0.8, params, 5000, 50, 1234);
  const auto b = bias_diagnostic(0.8, params, 5000, 50, 1234);
  CHECK(a.mean_bias_as == b.mean_bias_as);
  CHECK(a.empirical_variance_as2 == b.empirical_variance_as2);
  const auto c = bias_diagnostic(0.8, params, 5000, 50, 1235);
  CHECK(a.mean_bias_as != c.mean_bias_as);
}
