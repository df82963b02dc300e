#pragma once

namespace homsense {

// Principal branch of the Lambert W function, w*exp(w) = x, for x >= -1/e.
// Residual |w*e^w - x| <= 1e-12 * max(1, |x|). Throws std::domain_error below -1/e.
double lambert_w_principal(double x);

// Inverse standard normal CDF (Wichura's AS241 rational approximations).
// Used for quantile-based Gaussian draws and binomial inversion starting points.
double inverse_normal_cdf(double p);

}  // namespace homsense
