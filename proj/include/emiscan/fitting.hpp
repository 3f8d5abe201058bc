#pragma once

#include <utility>

#include "emiscan/errors.hpp"
#include "emiscan/lockin.hpp"
#include "emiscan/magnetometer.hpp"

namespace emiscan::fitting {

struct FitResult {
  magnetometer::ResonanceParams params;
  double r_peak{0.0};       // [V], R at delta = 0
  double phi_peak{0.0};     // [rad]
  double residual_rms{0.0}; // [V]
  bool converged{false};
  int iterations{0};
};

struct FitOptions {
  bool joint{true};          // shared (omega0, gamma, A) across X and Y
  bool phase_order_xy{true}; // phi = atan2(X, Y) as opposed to atan2(Y, X)
  int max_iterations{200};
  double tolerance{1e-8};    // relative parameter change
};

// Heuristic starting point: omega0 from the argmax of X (tie breaks to the
// lower frequency), gamma from the half-maximum crossing span, offsets
// from medians.
magnetometer::ResonanceParams initial_guess(const lockin::SweepRecord& record);

// Damped Gauss-Newton fit of the absorptive/dispersive pair.
FitResult fit_resonance(const lockin::SweepRecord& record, const FitOptions& options = {});

// Offset-free radius and phase of the fitted lineshape at omega.
std::pair<double, double> r_phi(const magnetometer::ResonanceParams& params, double omega,
                                bool phase_order_xy = true);

} // namespace emiscan::fitting
