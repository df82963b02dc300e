#pragma once

#include <vector>

#include "homsense/estimation.hpp"
#include "homsense/model.hpp"

namespace homsense {

struct ScanRecord {
  double tau_ground_truth_as = 0.0;  // stage readout
  CoincidenceCounts counts;
};

struct SigmaFit {
  double sigma_hat_ps = 0.0;
  double fit_residual = 0.0;  // RMS residual relative to the RMS of the fitted values
  int window_points = 0;      // interior points used by the fit
  int excluded_clamped = 0;   // in-window points dropped for clamped inversions
};

struct CalibrationRecord {
  double gamma_hat = 0.0;
  double alpha_hat = 0.0;
  double n_hat = 0.0;  // emitted pairs behind far_counts
  double sigma_hat_ps = 0.0;
  double fit_window_fs = 0.0;
  double fit_residual = 0.0;
  double center_as = 0.0;            // final fit-window center
  double provisional_sigma_ps = 0.0;  // bootstrap value before refinement
  int window_points = 0;
  int excluded_clamped = 0;
  bool coverage_ok = false;  // dip minimum interior to the scan
};

// Loss from counts accumulated far outside the dip: (N1-N2)/(N1+3*N2),
// clipped to [0, 1). Throws on N1+3*N2 = 0.
double estimate_gamma(const CoincidenceCounts& far_counts);

// Emitted-pair estimate (N1+N2)/(1-gamma^2). Real-valued.
double estimate_n(const CoincidenceCounts& far_counts, double gamma);

// Visibility from the dip floor: 1 - 2*min(N2)/(n*(1-gamma)^2), clipped to
// [0, 1]. The minimum is taken over a 5-point moving average of N2 with the
// scan sorted by delay, so the estimate depends on record values, not input
// order. `n` is the emitted-pair budget behind each scan record.
double estimate_alpha(const std::vector<ScanRecord>& scan, double n,
                      double gamma);

// Straightens the dip into a vee: inverts each in-window record to its
// scale-free delay magnitude, then least-squares fits those magnitudes
// against the stage delay (vertical residuals in the magnitude). sigma is
// the inverse slope. Window is `window_fs` wide, centered at `center_as`,
// on the positive branch. Clamped inversions are excluded; fewer than 5
// usable points is an error.
SigmaFit estimate_sigma(const std::vector<ScanRecord>& scan, double alpha,
                        double gamma, double window_fs, double center_as);

// Full chain: gamma and N from the far counts, alpha from the dip floor,
// then the sigma fit centered on the peak-information delay, bootstrapped
// from a provisional sigma and refined twice. pairs_ratio converts the
// far-dwell emitted-pair estimate to the per-record scan budget
// (scan pairs per record / far pairs).
CalibrationRecord calibrate(const CoincidenceCounts& far_counts,
                            const std::vector<ScanRecord>& scan,
                            double window_fs = 7.0, double pairs_ratio = 1.0);

}  // namespace homsense
