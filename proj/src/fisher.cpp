#include "homsense/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "homsense/special.hpp"
#include "homsense/units.hpp"

namespace homsense {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

FringeParams::FringeParams(double theta_rad_, double nu_THz_)
    : theta_rad(theta_rad_), nu_THz(nu_THz_) {
  constexpr double kHalfPi = 1.5707963267948966;
  if (!(theta_rad >= 0.0 && theta_rad <= kHalfPi)) {
    throw std::domain_error("theta_rad must be in [0, pi/2]");
  }
  if (!(nu_THz > 0.0)) {
    throw std::domain_error("nu_THz must be positive");
  }
}

std::optional<double> fisher_information_s(double s, const ModelParams& params) {
  if (params.alpha == 1.0 && s == 0.0) return std::nullopt;
  const double t = 1.0 - params.gamma;
  const double c = t * t;
  const double e = params.alpha * std::exp(-s * s);
  const double d = c * s * e;  // dP2/ds = -dP1/ds; dP0/ds = 0
  const double p2 = 0.5 * c * dip_complement(s, params.alpha);
  const double p1 = 0.5 * c * ((1.0 + 3.0 * params.gamma) / t + e);
  if (p2 == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return d * d * (1.0 / p1 + 1.0 / p2);
}

std::optional<double> fisher_information(double s, const ModelParams& params) {
  const auto fs = fisher_information_s(s, params);
  if (!fs) return std::nullopt;
  return *fs / (params.sigma_ps * params.sigma_ps);
}

std::optional<double> fisher_information_s_lossless(double s, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must be in [0, 1]");
  }
  if (alpha == 1.0 && s == 0.0) return std::nullopt;
  // e^{2s^2} - a^2 = expm1(2s^2) + (1 - a)(1 + a), cancellation-free
  const double denom = std::expm1(2.0 * s * s) + (1.0 - alpha) * (1.0 + alpha);
  const double num = 4.0 * alpha * alpha * s * s;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return num / denom;
}

double fisher_information_s_derivative(double s, const ModelParams& params) {
  const double t = 1.0 - params.gamma;
  const double c = t * t;
  const double e = params.alpha * std::exp(-s * s);
  const double d = c * s * e;
  const double dprime = c * e * (1.0 - 2.0 * s * s);
  const double p2 = 0.5 * c * dip_complement(s, params.alpha);
  const double p1 = 0.5 * c * ((1.0 + 3.0 * params.gamma) / t + e);
  // F' = 2 d d' (1/p1 + 1/p2) + d^3 (1/p1^2 - 1/p2^2)
  return 2.0 * d * dprime * (1.0 / p1 + 1.0 / p2) +
         d * d * d * (1.0 / (p1 * p1) - 1.0 / (p2 * p2));
}

namespace {

constexpr double kBracketLo = 1e-6;
constexpr double kBracketHi = 3.0;

double golden_section_peak(const ModelParams& params, double lo, double hi,
                           double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = fisher_information_s(x1, params).value();
  double f2 = fisher_information_s(x2, params).value();
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = fisher_information_s(x2, params).value();
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = fisher_information_s(x1, params).value();
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double peak_information_delay(const ModelParams& params) {
  if (!(params.alpha > 0.0)) {
    throw std::domain_error("peak_information_delay requires alpha > 0");
  }
  // At alpha = 1 the supremum sits at the (undefined) dip center.
  if (params.alpha == 1.0) return 0.0;

  const double coarse = golden_section_peak(params, kBracketLo, kBracketHi, 1e-4);

  // Comparisons of F alone cannot certify the peak below ~sqrt(eps); finish
  // with bisection on the analytic derivative.
  double a = std::max(kBracketLo, coarse - 5e-4);
  double b = std::min(kBracketHi, coarse + 5e-4);
  int widen = 0;
  while (fisher_information_s_derivative(a, params) <= 0.0 && a > kBracketLo) {
    a = std::max(kBracketLo, a - 0.05);
    if (++widen > 100) throw std::runtime_error("peak search failed to bracket (lo)");
  }
  while (fisher_information_s_derivative(b, params) >= 0.0 && b < kBracketHi) {
    b = std::min(kBracketHi, b + 0.05);
    if (++widen > 200) throw std::runtime_error("peak search failed to bracket (hi)");
  }
  for (int it = 0; it < 200 && b - a > 1e-12; ++it) {
    const double m = 0.5 * (a + b);
    if (fisher_information_s_derivative(m, params) > 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double peak_delay_lossless_closed_form(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("alpha must be in (0, 1]");
  }
  const double x = -alpha * alpha / std::exp(1.0);
  const double w = lambert_w_principal(x);
  return std::sqrt(std::max(0.0, (w + 1.0) / 2.0));
}

std::pair<double, double> dynamic_range(const ModelParams& params,
                                        double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0)) {
    throw std::domain_error("threshold_fraction must be in (0, 1)");
  }
  const double s_star = peak_information_delay(params);
  const double f_peak = params.alpha == 1.0
                            ? 2.0 * (1.0 - params.gamma) * (1.0 - params.gamma)
                            : fisher_information_s(s_star, params).value();
  const double target = threshold_fraction * f_peak;
  const auto above = [&](double s) {
    return fisher_information_s(s, params).value_or(f_peak) >= target;
  };

  // lower edge: F rises from 0 (alpha < 1) toward the peak
  double lo = 0.0;
  if (params.alpha < 1.0) {
    double a = 1e-12, b = std::max(s_star, 1e-9);
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      (above(m) ? b : a) = m;
    }
    lo = 0.5 * (a + b);
  }

  // upper edge: expand beyond the peak until F drops below the target
  double hi_probe = std::max(s_star * 2.0, 1.0);
  while (above(hi_probe) && hi_probe < 20.0) hi_probe *= 1.5;
  double a = std::max(s_star, 1e-12), b = std::min(hi_probe, 20.0);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    (above(m) ? a : b) = m;
  }
  const double hi = 0.5 * (a + b);

  return {time_from_normalized_delay(lo, params.sigma_ps),
          time_from_normalized_delay(hi, params.sigma_ps)};
}

double fringe_coincidence_probability(double tau_as, const ModelParams& params,
                                      const FringeParams& fringe) {
  if (params.gamma != 0.0) {
    throw std::domain_error("fringe model carries no loss; gamma must be 0");
  }
  const double tau_ps = as_to_ps(tau_as);
  const double s = tau_ps / params.sigma_ps;
  const double g = params.alpha * std::exp(-s * s);
  const double s2 = std::sin(2.0 * fringe.theta_rad) * std::sin(2.0 * fringe.theta_rad);
  const double cphi = std::cos(2.0 * kPi * fringe.nu_THz * tau_ps);
  return 0.5 * (s2 * (g + 1.0) * cphi * cphi - g + 1.0);
}

std::optional<double> fringe_fisher_information(double tau_as,
                                                const ModelParams& params,
                                                const FringeParams& fringe) {
  if (params.gamma != 0.0) {
    throw std::domain_error("fringe model carries no loss; gamma must be 0");
  }
  const double tau = as_to_ps(tau_as);
  const double sg = params.sigma_ps;
  const double a = params.alpha;
  const double u = tau * tau / (sg * sg);
  const double em = std::expm1(u);
  const double a_plus_eu = (1.0 + a) + em;
  const double eu_minus_a = (1.0 - a) + em;
  const double s2 = std::sin(2.0 * fringe.theta_rad) * std::sin(2.0 * fringe.theta_rad);
  const double phi = 2.0 * kPi * fringe.nu_THz * tau;
  const double c = std::cos(phi);
  const double c2 = c * c;
  const double sin2phi = std::sin(2.0 * phi);

  const double num = kPi * fringe.nu_THz * sg * sg * s2 * a_plus_eu * sin2phi +
                     a * tau * (s2 * c2 - 1.0);
  // last factor is a sum of nonnegative terms, so den <= 0 with no cancellation
  const double den = sg * sg * sg * sg * a_plus_eu * (s2 * c2 - 1.0) *
                     (s2 * a_plus_eu * c2 + eu_minus_a);
  if (den == 0.0) return std::nullopt;
  if (num == 0.0) return 0.0;
  return -4.0 * num * num / den;
}

namespace {

InformationProfile finalize_profile(InformationProfile p) {
  double best = -1.0;
  double best_delay = 0.0;
  for (std::size_t i = 0; i < p.fisher_ps2.size(); ++i) {
    if (p.defined[i] && p.fisher_ps2[i] > best) {
      best = p.fisher_ps2[i];
      best_delay = p.delays_as[i];
    }
  }
  p.peak_value_ps2 = best < 0.0 ? 0.0 : best;
  p.peak_delay_as = best_delay;
  return p;
}

}  // namespace

InformationProfile hom_information_profile(const ModelParams& params,
                                           const std::vector<double>& delays_as) {
  InformationProfile p;
  p.delays_as = delays_as;
  p.fisher_ps2.reserve(delays_as.size());
  p.defined.reserve(delays_as.size());
  for (double tau_as : delays_as) {
    const double s = normalized_delay_from_time(tau_as, params.sigma_ps);
    const auto f = fisher_information(s, params);
    p.fisher_ps2.push_back(f.value_or(0.0));
    p.defined.push_back(f.has_value() ? 1 : 0);
  }
  return finalize_profile(std::move(p));
}

InformationProfile fringe_information_profile(const ModelParams& params,
                                              const FringeParams& fringe,
                                              const std::vector<double>& delays_as) {
  InformationProfile p;
  p.delays_as = delays_as;
  p.fisher_ps2.reserve(delays_as.size());
  p.defined.reserve(delays_as.size());
  for (double tau_as : delays_as) {
    const auto f = fringe_fisher_information(tau_as, params, fringe);
    p.fisher_ps2.push_back(f.value_or(0.0));
    p.defined.push_back(f.has_value() ? 1 : 0);
  }
  return finalize_profile(std::move(p));
}

}  // namespace homsense
