#include "homsense/model.hpp"

#include <cmath>

#include "homsense/units.hpp"

namespace homsense {

ModelParams::ModelParams(double alpha_, double gamma_, double sigma_ps_)
    : alpha(alpha_), gamma(gamma_), sigma_ps(sigma_ps_) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must be in [0, 1]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw std::domain_error("gamma must be in [0, 1)");
  }
  if (!(sigma_ps > 0.0)) {
    throw std::domain_error("sigma_ps must be positive");
  }
}

double dip_complement(double s, double alpha) {
  // (1 - alpha) + alpha*(1 - exp(-s^2)) avoids cancellation near s = 0, alpha = 1.
  return (1.0 - alpha) + alpha * (-std::expm1(-s * s));
}

double coincidence_probability_lossless(double s, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must be in [0, 1]");
  }
  return 0.5 * dip_complement(s, alpha);
}

OutcomeProbabilities outcome_probabilities(double s, const ModelParams& params) {
  const double e = params.alpha * std::exp(-s * s);
  const double t = 1.0 - params.gamma;
  const double half_t2 = 0.5 * t * t;
  OutcomeProbabilities p;
  p.p0 = params.gamma * params.gamma;
  p.p1 = half_t2 * ((1.0 + 3.0 * params.gamma) / t + e);
  p.p2 = half_t2 * dip_complement(s, params.alpha);
  return p;
}

double normalized_delay_from_time(double tau_as, double sigma_ps) {
  if (!(sigma_ps > 0.0)) {
    throw std::domain_error("sigma_ps must be positive");
  }
  return tau_as / ps_to_as(sigma_ps);
}

double time_from_normalized_delay(double s, double sigma_ps) {
  if (!(sigma_ps > 0.0)) {
    throw std::domain_error("sigma_ps must be positive");
  }
  return s * ps_to_as(sigma_ps);
}

}  // namespace homsense
