#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "homsense/model.hpp"

namespace homsense {

// Waveplate rotation and optical frequency of the phase-fringe variant.
struct FringeParams {
  double theta_rad;  // in [0, pi/2]
  double nu_THz;     // > 0

  FringeParams(double theta_rad_, double nu_THz_);
};

struct InformationProfile {
  std::vector<double> delays_as;
  std::vector<double> fisher_ps2;
  std::vector<std::uint8_t> defined;  // 0 where the value is undefined
  double peak_delay_as = 0.0;
  double peak_value_ps2 = 0.0;
};

// Per-pair Fisher information about s, summed over the three outcomes.
// Undefined exactly at (alpha = 1, s = 0); that single point reports nullopt.
std::optional<double> fisher_information_s(double s, const ModelParams& params);

// Same information about tau, in ps^-2 (F_tau = F_s / sigma^2).
std::optional<double> fisher_information(double s, const ModelParams& params);

// Closed form 4 a^2 s^2 / (e^{2s^2} - a^2), valid for gamma = 0.
std::optional<double> fisher_information_s_lossless(double s, double alpha);

// Analytic d F_s / d s, used by the peak search and verified against
// central differences in tests.
double fisher_information_s_derivative(double s, const ModelParams& params);

// Positive-branch delay maximizing the Fisher information. Golden-section
// bracketing on (1e-6, 3) refined by bisection on the analytic derivative.
double peak_information_delay(const ModelParams& params);

// Lossless closed form s* = sqrt((W(-a^2/e) + 1) / 2).
double peak_delay_lossless_closed_form(double alpha);

// Widest contiguous positive-branch interval where F(s) >= threshold * F(s*),
// returned in attoseconds.
std::pair<double, double> dynamic_range(const ModelParams& params,
                                        double threshold_fraction);

// Coincidence probability of the fringe variant (lossless by construction;
// params.gamma must be 0).
double fringe_coincidence_probability(double tau_as, const ModelParams& params,
                                      const FringeParams& fringe);

// Two-outcome Fisher information of the fringe variant, ps^-2. Points where
// the denominator vanishes (exact antinodes at theta = 45 degrees, and the
// alpha = 1 dip center) report nullopt.
std::optional<double> fringe_fisher_information(double tau_as,
                                                const ModelParams& params,
                                                const FringeParams& fringe);

InformationProfile hom_information_profile(const ModelParams& params,
                                           const std::vector<double>& delays_as);

InformationProfile fringe_information_profile(const ModelParams& params,
                                              const FringeParams& fringe,
                                              const std::vector<double>& delays_as);

}  // namespace homsense
