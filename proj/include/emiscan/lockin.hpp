#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <utility>

#include "emiscan/errors.hpp"
#include "emiscan/magnetometer.hpp"

namespace emiscan::lockin {

struct DriveConfig {
  double omega_rf{0.0};        // [rad/s]
  double duration{15e-3};      // [s], record length per measurement
  double sample_rate{2e6};     // [Hz]
  double lp_time_constant{3e-3}; // [s], single-pole low-pass
  double reference_phase{0.0}; // [rad], LIA reference offset
};

struct NoiseSpec {
  double rms_voltage{0.0}; // [V], white gaussian, per raw sample
  std::uint64_t seed{0};
};

struct SweepRecord {
  Eigen::ArrayXd omegas; // [rad/s], strictly increasing
  Eigen::ArrayXd x;      // [V]
  Eigen::ArrayXd y;      // [V]
};

// Polarimeter time series at the RF drive:
//   s(t) = X cos(w t) + Y sin(w t) + n(t)
// with (X, Y) from the magnetometer lineshape.
Eigen::ArrayXd synthesize(const magnetometer::ResonanceParams& params,
                          const DriveConfig& drive, std::complex<double> b_transverse,
                          double b_ref, const NoiseSpec& noise);

// Dual-phase demodulation referenced at omega_rf; value taken at the end
// of the record.
std::pair<double, double> demodulate(const Eigen::ArrayXd& signal, const DriveConfig& drive);

// Standard deviation that the demodulated outputs inherit from white
// sample noise of the given RMS, for this drive configuration.
double demod_noise_sigma(const DriveConfig& drive, double rms_voltage);

// Full synthesize + demodulate round trip for one RF frequency.
std::pair<double, double> measure(const magnetometer::ResonanceParams& params,
                                  const DriveConfig& drive, std::complex<double> b_transverse,
                                  double b_ref, const NoiseSpec& noise);

// Analytic equivalent of measure(): lineshape plus gaussian noise with the
// demodulation-propagated sigma. Bit-for-bit deterministic under the seed.
std::pair<double, double> measure_analytic(const magnetometer::ResonanceParams& params,
                                           const DriveConfig& drive,
                                           std::complex<double> b_transverse, double b_ref,
                                           const NoiseSpec& noise);

// Sweep omega_rf across [center - half_span, center + half_span] in
// n_points even steps; one measure per point, seeds split per point.
SweepRecord run_sweep(const magnetometer::ResonanceParams& params, DriveConfig drive,
                      double center, double half_span, int n_points,
                      std::complex<double> b_transverse, double b_ref,
                      const NoiseSpec& noise, bool time_domain = true);

} // namespace emiscan::lockin
