#pragma once

#include <Eigen/Dense>
#include <vector>

#include "emiscan/errors.hpp"

namespace emiscan::beamsteer {

struct AodSpec {
  double acoustic_speed{650.0};   // [m/s]
  double refractive_index{2.26};
  double wavelength{780e-9};      // [m]
  double center_freq{100e6};      // [Hz]
  double freq_span{50e6};         // [Hz]
  double rise_time{10e-6};        // [s]
};

struct LensSpec {
  double focal_length{1.0}; // [m]
};

// Image pixel lattice in the x-z plane. origin is the position of pixel
// (row 0, col 0); columns advance along x, rows along z.
struct PixelGrid {
  int n_rows{35};
  int n_cols{35};
  double step{1e-3};                       // [m]
  Eigen::Vector2d origin{-17e-3, -17e-3}; // [m] (x, z)

  Eigen::Vector2d position(int row, int col) const {
    return {origin.x() + col * step, origin.y() + row * step};
  }
  int pixel_count() const { return n_rows * n_cols; }

  static PixelGrid centered(int n_rows, int n_cols, double step) {
    PixelGrid g{n_rows, n_cols, step};
    g.origin = {-0.5 * (n_cols - 1) * step, -0.5 * (n_rows - 1) * step};
    return g;
  }
};

struct RasterEntry {
  int pixel_index{0}; // row-major
  double drive_freq_x{0.0}; // [Hz]
  double drive_freq_z{0.0}; // [Hz]
};

struct RasterPlan {
  std::vector<RasterEntry> entries;
  double steering_time_per_move{0.0}; // [s]
};

// Bragg diffraction angle for a given order; the acoustic wavelength is
// acoustic_speed / drive_freq.
double bragg_angle(const AodSpec& aod, int order, double drive_freq);

// External first-order deflection angle, alpha = lambda nu / speed.
double deflection_angle(const AodSpec& aod, double drive_freq);

// Beam translation in the focal plane for a drive-frequency offset from
// the AOD center frequency.
double beam_position(const LensSpec& lens, const AodSpec& aod, double drive_freq_offset,
                     double aperture_half_width = 30e-3);

// Inverse of beam_position.
double drive_freq_for_position(const LensSpec& lens, const AodSpec& aod, double position);

// Row-major raster plan; one entry per grid pixel.
RasterPlan plan_raster(const PixelGrid& grid, const AodSpec& aod_x, const AodSpec& aod_z,
                       const LensSpec& lens);

} // namespace emiscan::beamsteer
