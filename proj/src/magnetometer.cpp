#include "emiscan/magnetometer.hpp"

#include <cmath>

namespace emiscan::magnetometer {

double larmor_frequency(double bias_tesla) {
  return kGammaEff * bias_tesla;
}

ResonanceParams resonance_at(const SensorVoxel& voxel, const MagnetometerConfig& config,
                             double pixel_amplitude) {
  if (!config.cell.contains(voxel.center)) {
    throw VoxelOutsideCell("sensor voxel lies outside the vapour cell");
  }
  const double x = voxel.center.x() - config.cell.center.x();
  const double z = voxel.center.z() - config.cell.center.z();

  ResonanceParams p;
  p.omega0 = larmor_frequency(config.bias.nominal_bias) + config.bias.delta_omega0(x, z);
  p.gamma_fwhm = config.gamma_fwhm;
  p.amplitude = pixel_amplitude * config.profile.scale(x, z);
  return p;
}

std::pair<double, double> lineshape(const ResonanceParams& params, double omega_rf,
                                    std::complex<double> b_transverse, double b_ref) {
  const double delta = omega_rf - params.omega0;
  const double h = params.gamma_fwhm / 2.0;
  const double denom = delta * delta + h * h;
  const double a_eff = params.amplitude * std::abs(b_transverse) / b_ref;

  const double x0 = a_eff * h * h / denom;
  const double y0 = a_eff * h * delta / denom;

  const double phase = params.phase0 + std::arg(b_transverse);
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  return {c * x0 - s * y0 + params.x_offset, s * x0 + c * y0 + params.y_offset};
}

} // namespace emiscan::magnetometer
