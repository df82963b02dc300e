#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "homsense/special.hpp"

using namespace homsense;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("Lambert W fixed points") {
  CHECK(lambert_w_principal(0.0) == 0.0);
  // omega constant, frozen from a bisection solve of w*e^w = 1
  CHECK(lambert_w_principal(1.0) ==
        doctest::Approx(0.56714329040978387).epsilon(1e-14));
  CHECK(lambert_w_principal(-0.36787944117144233) == -1.0);
  CHECK(lambert_w_principal(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(lambert_w_principal(-0.37), std::domain_error);
  CHECK_THROWS_AS(lambert_w_principal(-1.0), std::domain_error);
}

TEST_CASE("Lambert W defining equation holds across the domain") {
  const double neg_inv_e = -0.36787944117144233;
  for (int i = 0; i <= 400; ++i) {
    // geometric-ish sweep from just above the branch point out to 1e8
    const double t = static_cast<double>(i) / 400.0;
    const double x = i < 200 ? neg_inv_e + (1.0 - neg_inv_e) * (t * t * 2.0)
                             : std::pow(10.0, 16.0 * (t - 0.5));
    const double w = lambert_w_principal(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("Lambert W near the branch point") {
  const double neg_inv_e = -0.36787944117144233;
  const double w = lambert_w_principal(neg_inv_e + 1e-10);
  CHECK(w > -1.0);
  CHECK(w == doctest::Approx(-1.0).epsilon(3e-5));  // sqrt-type departure
  CHECK(std::abs(w * std::exp(w) - (neg_inv_e + 1e-10)) <= 1e-12);
}

TEST_CASE("inverse normal CDF matches the erfc-based CDF") {
  CHECK(inverse_normal_cdf(0.5) == 0.0);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  const double ps[] = {1e-12, 1e-10, 1e-6, 1e-3, 0.02425, 0.1,  0.3,
                       0.5,   0.7,   0.9,  0.97575, 0.999, 1.0 - 1e-7};
  for (double p : ps) {
    const double z = inverse_normal_cdf(p);
    CHECK(std::abs(normal_cdf(z) - p) <= 1e-9 * p + 1e-15);
  }
}

TEST_CASE("inverse normal CDF is antisymmetric and monotone") {
  for (int i = 1; i < 100; ++i) {
    const double p = static_cast<double>(i) / 100.0;
    CHECK(inverse_normal_cdf(p) == doctest::Approx(-inverse_normal_cdf(1.0 - p))
                                       .epsilon(1e-12));
    if (i > 1) {
      CHECK(inverse_normal_cdf(p) >
            inverse_normal_cdf(static_cast<double>(i - 1) / 100.0));
    }
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
  CHECK_THROWS_AS(inverse_normal_cdf(-0.5), std::domain_error);
}
