#include "homsense/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace homsense {

namespace {
constexpr double kNegInvE = -0.36787944117144233;
}

double lambert_w_principal(double x) {
  if (!(x >= kNegInvE)) {
    // tolerate rounding fuzz right at the branch point
    if (x > kNegInvE - 4e-17) return -1.0;
    throw std::domain_error("lambert_w_principal: x below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (x - kNegInvE < 1e-300) return -1.0;

  double w;
  if (x < -0.25) {
    // series around the branch point in p = sqrt(2(1 + e x))
    const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + std::exp(1.0) * x)));
    w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
  } else if (x < 3.0) {
    w = x / (1.0 + x);  // crude but inside the Halley basin
  } else {
    const double l = std::log(x);
    w = l - std::log(l);
  }

  const double tol = 1e-13 * std::max(1.0, std::abs(x));
  double best_w = w;
  double best_f = std::abs(w * std::exp(w) - x);
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) < best_f) {
      best_f = std::abs(f);
      best_w = w;
    }
    if (std::abs(f) <= tol) return w;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(w))) {
      return std::abs(w * std::exp(w) - x) <= best_f ? w : best_w;
    }
  }
  return best_w;
}

// Wichura, Applied Statistics 37 (1988), algorithm AS241 (PPND16).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("inverse_normal_cdf: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace homsense
