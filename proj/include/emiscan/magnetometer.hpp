#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "emiscan/constants.hpp"
#include "emiscan/errors.hpp"

namespace emiscan::magnetometer {

using Vec3 = Eigen::Vector3d;

// Effective gyromagnetic slope: 150 mG bias <-> 105 kHz resonance.
inline constexpr double kGammaEff = kTwoPi * 7.0e9; // [rad / (s T)]

struct CellSpec {
  Vec3 dimensions{60e-3, 60e-3, 20e-3}; // W x L x H [m], height along y
  Vec3 center{0.0, 0.0, 0.0};
  double diffusion_length{1.95e-3}; // [m]

  bool contains(const Vec3& p) const {
    const Vec3 d = (p - center).cwiseAbs();
    return d.x() <= dimensions.x() / 2.0 && d.y() <= dimensions.z() / 2.0 &&
           d.z() <= dimensions.y() / 2.0;
  }
};

// Pump-probe intersection volume; the diffusion length blurs its edge.
struct SensorVoxel {
  Vec3 center{Vec3::Zero()};
  double pump_diameter{3.4e-3};  // [m], 1/e^2
  double probe_diameter{2.5e-3}; // [m], 1/e^2
  double effective_radius{0.0};  // [m]

  static SensorVoxel at(const Vec3& center, const CellSpec& cell,
                        double pump_diameter = 3.4e-3, double probe_diameter = 2.5e-3) {
    SensorVoxel v;
    v.center = center;
    v.pump_diameter = pump_diameter;
    v.probe_diameter = probe_diameter;
    v.effective_radius =
        std::max(pump_diameter, probe_diameter) / 2.0 + cell.diffusion_length;
    return v;
  }
};

// Ideal stabilized bias plus a static quadratic inhomogeneity bowl:
// zero shift at the cell center, the configured bound at the corners of
// the imaging area.
struct BiasFieldMap {
  double nominal_bias{1.5e-5};           // [T] (150 mG)
  double max_shift{kTwoPi * 2.0e3};      // [rad/s] at the imaging-area corner
  double area_half_width{20e-3};         // [m], imaging area half side
  double curvature_sign{1.0};

  double delta_omega0(double x, double z) const {
    const double r2_max = 2.0 * area_half_width * area_half_width;
    return curvature_sign * max_shift * (x * x + z * z) / r2_max;
  }
};

// Phenomenological pixel-amplitude falloff from the cell center.
struct AmplitudeProfile {
  double corner_value{0.55};     // relative amplitude at the area corner
  double area_half_width{20e-3}; // [m]

  double scale(double x, double z) const {
    const double r2_max = 2.0 * area_half_width * area_half_width;
    return std::pow(corner_value, (x * x + z * z) / r2_max);
  }
};

struct ResonanceParams {
  double omega0{0.0};     // [rad/s]
  double gamma_fwhm{0.0}; // [rad/s]
  double amplitude{0.0};  // [V]
  double x_offset{0.0};   // [V]
  double y_offset{0.0};   // [V]
  double phase0{0.0};     // [rad]
};

struct MagnetometerConfig {
  CellSpec cell;
  BiasFieldMap bias;
  AmplitudeProfile profile;
  double gamma_fwhm{kTwoPi * 2.4e3}; // [rad/s]
};

double larmor_frequency(double bias_tesla);

ResonanceParams resonance_at(const SensorVoxel& voxel, const MagnetometerConfig& config,
                             double pixel_amplitude);

// Absorptive / dispersive quadrature pair at a single RF frequency.
// b_transverse scales and phase-rotates the response; b_ref is the
// no-target transverse drive amplitude at the same pixel.
std::pair<double, double> lineshape(const ResonanceParams& params, double omega_rf,
                                    std::complex<double> b_transverse,
                                    double b_ref = 1.0);

} // namespace emiscan::magnetometer
