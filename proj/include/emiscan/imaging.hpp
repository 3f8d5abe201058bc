#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "emiscan/beamsteer.hpp"
#include "emiscan/errors.hpp"
#include "emiscan/fields.hpp"
#include "emiscan/fitting.hpp"
#include "emiscan/lockin.hpp"
#include "emiscan/magnetometer.hpp"

namespace emiscan::imaging {

enum class ScanModeKind { FullSweep, FastSinglePoint };

struct ScanMode {
  ScanModeKind kind{ScanModeKind::FullSweep};
  int n_points{50};              // FullSweep samples across omega0 +/- 5 Gamma
  double dwell{40e-3};           // [s], FastSinglePoint record length
  Eigen::ArrayXXd omega_table;   // [rad/s] per pixel, FastSinglePoint only
};

struct ScanScenario {
  magnetometer::MagnetometerConfig magnetometer;
  magnetometer::SensorVoxel voxel_template; // beam diameters; center set per pixel
  fields::CoilSpec coil;
  std::vector<fields::TargetPlate> targets;
  beamsteer::PixelGrid grid;
  beamsteer::AodSpec aod_x;
  beamsteer::AodSpec aod_z;
  beamsteer::LensSpec lens;
  lockin::DriveConfig drive;
  lockin::NoiseSpec noise;
  ScanMode mode;
  double control_latency{1e-6};  // [s/pixel]
  double mesh_pitch{2.5e-3};     // [m]
  double pixel_amplitude{1.0};   // [V]
  bool time_domain{false};       // full time-series synthesis vs analytic path
};

struct EmiImage {
  beamsteer::PixelGrid grid;
  Eigen::ArrayXXd r;        // [V] (dimensionless after normalize)
  Eigen::ArrayXXd phi;      // [rad]
  Eigen::ArrayXXd omega0;   // [rad/s]
  Eigen::ArrayXXd gamma;    // [rad/s]
  Eigen::ArrayXXi converged;
  Eigen::ArrayXXd steer_s;
  Eigen::ArrayXXd control_s;
  Eigen::ArrayXXd measure_s;

  explicit EmiImage(const beamsteer::PixelGrid& g = {})
      : grid(g),
        r(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        phi(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        omega0(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        gamma(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        converged(Eigen::ArrayXXi::Zero(g.n_rows, g.n_cols)),
        steer_s(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        control_s(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)),
        measure_s(Eigen::ArrayXXd::Zero(g.n_rows, g.n_cols)) {}
};

struct TimingSummary {
  double total_steer{0.0};
  double total_control{0.0};
  double total_measure{0.0};
  double mean_steer{0.0};
  double mean_control{0.0};
  double mean_measure{0.0};
  std::string dominant; // "steer", "control" or "measure"
};

void validate(const ScanScenario& scenario);

// Full raster acquisition. Deterministic under the noise seed regardless
// of n_threads (0 = hardware concurrency).
EmiImage run_scan(const ScanScenario& scenario, int n_threads = 0);

// Per-pixel background / target division.
EmiImage normalize(const EmiImage& background, const EmiImage& target);

// Gaussian smoothing of the r channel, sigma = radius pixels, edge taps
// renormalized.
EmiImage smooth(const EmiImage& image, int radius = 1);

TimingSummary timing_report(const EmiImage& image);

} // namespace emiscan::imaging
