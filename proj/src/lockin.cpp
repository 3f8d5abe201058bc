#include "emiscan/lockin.hpp"

#include <cmath>

#include "emiscan/constants.hpp"
#include "emiscan/rng.hpp"

namespace emiscan::lockin {

namespace {

long sample_count(const DriveConfig& drive) {
  return std::lround(drive.duration * drive.sample_rate);
}

double lp_alpha(const DriveConfig& drive) {
  const double dt = 1.0 / drive.sample_rate;
  return 1.0 - std::exp(-dt / drive.lp_time_constant);
}

} // namespace

Eigen::ArrayXd synthesize(const magnetometer::ResonanceParams& params,
                          const DriveConfig& drive, std::complex<double> b_transverse,
                          double b_ref, const NoiseSpec& noise) {
  if (drive.sample_rate <= 2.0 * drive.omega_rf / kTwoPi) {
    throw NyquistViolation("sample rate below twice the RF frequency");
  }
  const auto [x, y] = magnetometer::lineshape(params, drive.omega_rf, b_transverse, b_ref);
  const long n = sample_count(drive);
  Eigen::ArrayXd s(n);

  // rotation recurrence for cos/sin of w t_k
  const double dphi = drive.omega_rf / drive.sample_rate;
  const double cd = std::cos(dphi);
  const double sd = std::sin(dphi);
  double c = 1.0;
  double sn = 0.0;
  if (noise.rms_voltage > 0.0) {
    rng::Gaussian g(noise.seed);
    for (long k = 0; k < n; ++k) {
      s[k] = x * c + y * sn + noise.rms_voltage * g();
      const double cn = c * cd - sn * sd;
      sn = sn * cd + c * sd;
      c = cn;
    }
  } else {
    for (long k = 0; k < n; ++k) {
      s[k] = x * c + y * sn;
      const double cn = c * cd - sn * sd;
      sn = sn * cd + c * sd;
      c = cn;
    }
  }
  return s;
}

std::pair<double, double> demodulate(const Eigen::ArrayXd& signal, const DriveConfig& drive) {
  const long n = sample_count(drive);
  if (signal.size() != n) {
    throw LengthMismatch("signal length does not match duration * sample_rate");
  }
  const double alpha = lp_alpha(drive);
  const double dphi = drive.omega_rf / drive.sample_rate;
  const double cd = std::cos(dphi);
  const double sd = std::sin(dphi);
  // positive reference phase rotates (X, Y) by -phase
  double c = std::cos(-drive.reference_phase);
  double sn = std::sin(-drive.reference_phase);
  double lx = 0.0;
  double ly = 0.0;
  for (long k = 0; k < n; ++k) {
    lx += alpha * (signal[k] * c - lx);
    ly += alpha * (signal[k] * sn - ly);
    const double cn = c * cd - sn * sd;
    sn = sn * cd + c * sd;
    c = cn;
  }
  return {2.0 * lx, 2.0 * ly};
}

double demod_noise_sigma(const DriveConfig& drive, double rms_voltage) {
  const double alpha = lp_alpha(drive);
  // mixer halves the variance, the x2 output gain quadruples it,
  // the one-pole filter passes alpha / (2 - alpha) of it
  return rms_voltage * std::sqrt(2.0 * alpha / (2.0 - alpha));
}

std::pair<double, double> measure(const magnetometer::ResonanceParams& params,
                                  const DriveConfig& drive, std::complex<double> b_transverse,
                                  double b_ref, const NoiseSpec& noise) {
  return demodulate(synthesize(params, drive, b_transverse, b_ref, noise), drive);
}

std::pair<double, double> measure_analytic(const magnetometer::ResonanceParams& params,
                                           const DriveConfig& drive,
                                           std::complex<double> b_transverse, double b_ref,
                                           const NoiseSpec& noise) {
  auto [x, y] = magnetometer::lineshape(params, drive.omega_rf, b_transverse, b_ref);
  if (noise.rms_voltage > 0.0) {
    const double sigma = demod_noise_sigma(drive, noise.rms_voltage);
    rng::Gaussian g(noise.seed);
    x += sigma * g();
    y += sigma * g();
  }
  if (drive.reference_phase != 0.0) {
    const double c = std::cos(drive.reference_phase);
    const double s = std::sin(drive.reference_phase);
    return {c * x + s * y, -s * x + c * y};
  }
  return {x, y};
}

SweepRecord run_sweep(const magnetometer::ResonanceParams& params, DriveConfig drive,
                      double center, double half_span, int n_points,
                      std::complex<double> b_transverse, double b_ref,
                      const NoiseSpec& noise, bool time_domain) {
  if (n_points < 5) {
    throw DegenerateSweep("sweep needs at least 5 points");
  }
  SweepRecord record;
  record.omegas.resize(n_points);
  record.x.resize(n_points);
  record.y.resize(n_points);
  const double step = 2.0 * half_span / (n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    drive.omega_rf = center - half_span + i * step;
    NoiseSpec point_noise = noise;
    point_noise.seed = rng::derive(noise.seed, static_cast<std::uint64_t>(i));
    const auto [x, y] = time_domain
                            ? measure(params, drive, b_transverse, b_ref, point_noise)
                            : measure_analytic(params, drive, b_transverse, b_ref, point_noise);
    record.omegas[i] = drive.omega_rf;
    record.x[i] = x;
    record.y[i] = y;
  }
  return record;
}

} // namespace emiscan::lockin
