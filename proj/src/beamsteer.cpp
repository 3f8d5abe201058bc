#include "emiscan/beamsteer.hpp"

#include <cmath>

namespace emiscan::beamsteer {

double bragg_angle(const AodSpec& aod, int order, double drive_freq) {
  if (order == 0) {
    return 0.0;
  }
  const double acoustic_wavelength = aod.acoustic_speed / drive_freq;
  const double arg =
      order * aod.wavelength / (2.0 * aod.refractive_index * acoustic_wavelength);
  if (std::abs(arg) > 1.0) {
    throw UnphysicalOrder("Bragg condition has no solution for this order");
  }
  return std::asin(arg);
}

double deflection_angle(const AodSpec& aod, double drive_freq) {
  if (drive_freq < aod.center_freq - aod.freq_span / 2.0 ||
      drive_freq > aod.center_freq + aod.freq_span / 2.0) {
    throw FrequencyOutOfRange("drive frequency outside the AOD span");
  }
  return aod.wavelength * drive_freq / aod.acoustic_speed;
}

double beam_position(const LensSpec& lens, const AodSpec& aod, double drive_freq_offset,
                     double aperture_half_width) {
  const double x = lens.focal_length * aod.wavelength * drive_freq_offset / aod.acoustic_speed;
  if (std::abs(x) > aperture_half_width) {
    throw OutsideCell("beam position outside the cell aperture");
  }
  return x;
}

double drive_freq_for_position(const LensSpec& lens, const AodSpec& aod, double position) {
  return aod.center_freq +
         position * aod.acoustic_speed / (lens.focal_length * aod.wavelength);
}

RasterPlan plan_raster(const PixelGrid& grid, const AodSpec& aod_x, const AodSpec& aod_z,
                       const LensSpec& lens) {
  RasterPlan plan;
  plan.steering_time_per_move = std::max(aod_x.rise_time, aod_z.rise_time);
  plan.entries.reserve(static_cast<std::size_t>(grid.pixel_count()));
  for (int row = 0; row < grid.n_rows; ++row) {
    for (int col = 0; col < grid.n_cols; ++col) {
      const Eigen::Vector2d pos = grid.position(row, col);
      RasterEntry e;
      e.pixel_index = row * grid.n_cols + col;
      e.drive_freq_x = drive_freq_for_position(lens, aod_x, pos.x());
      e.drive_freq_z = drive_freq_for_position(lens, aod_z, pos.y());
      if (std::abs(e.drive_freq_x - aod_x.center_freq) > aod_x.freq_span / 2.0 ||
          std::abs(e.drive_freq_z - aod_z.center_freq) > aod_z.freq_span / 2.0) {
        throw GridExceedsSpan("grid pixel maps outside the AOD frequency span");
      }
      plan.entries.push_back(e);
    }
  }
  return plan;
}

} // namespace emiscan::beamsteer
