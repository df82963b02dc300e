#pragma once

#include <stdexcept>

namespace homsense {

// Nuisance parameters of the coincidence statistics model.
// sigma_ps is the dip width parameter; the s.d. of each Gaussian mode is sigma/sqrt(8).
struct ModelParams {
  double alpha;     // visibility, in [0, 1]
  double gamma;     // per-photon loss probability, in [0, 1)
  double sigma_ps;  // dip width, picoseconds, > 0

  ModelParams(double alpha_, double gamma_, double sigma_ps_);
};

struct OutcomeProbabilities {
  double p0;  // no detector clicked
  double p1;  // exactly one clicked
  double p2;  // both clicked (coincidence)
};

// 1 - alpha*exp(-s^2), evaluated without cancellation for small s and alpha near 1.
double dip_complement(double s, double alpha);

// Lossless coincidence probability (1 - alpha*exp(-s^2)) / 2.
double coincidence_probability_lossless(double s, double alpha);

// Full three-outcome model with loss.
OutcomeProbabilities outcome_probabilities(double s, const ModelParams& params);

// s = tau / sigma with unit bookkeeping.
double normalized_delay_from_time(double tau_as, double sigma_ps);
double time_from_normalized_delay(double s, double sigma_ps);

}  // namespace homsense
