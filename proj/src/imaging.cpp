#include "emiscan/imaging.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "emiscan/constants.hpp"
#include "emiscan/rng.hpp"

namespace emiscan::imaging {

namespace {

// Seed-path tags keeping the two modes' noise streams disjoint.
constexpr std::uint64_t kFullTag = 0x66756c6cULL;
constexpr std::uint64_t kFastTag = 0x66617374ULL;

// 7-point stencil (center +/- effective radius along each axis) averaging
// of the transverse drive component; emulates the diffusion-blurred voxel.
std::complex<double> sampled_drive(const fields::CoilSpec& coil,
                                   const std::vector<fields::EddyMesh>& meshes,
                                   const fields::Vec3& center, double radius) {
  const fields::Vec3 offsets[7] = {
      {0, 0, 0},       {radius, 0, 0},  {-radius, 0, 0}, {0, radius, 0},
      {0, -radius, 0}, {0, 0, radius},  {0, 0, -radius},
  };
  std::complex<double> acc{0.0, 0.0};
  for (const auto& off : offsets) {
    const fields::PhasorField f = fields::total_rf_field(coil, meshes, center + off);
    acc += f.b.y(); // RF drive is along y, transverse to the z bias
  }
  return acc / 7.0;
}

} // namespace

void validate(const ScanScenario& scenario) {
  const auto& cell = scenario.magnetometer.cell;
  const double half_w = cell.dimensions.x() / 2.0;
  const double half_l = cell.dimensions.y() / 2.0;
  const Eigen::Vector2d lo = scenario.grid.position(0, 0);
  const Eigen::Vector2d hi =
      scenario.grid.position(scenario.grid.n_rows - 1, scenario.grid.n_cols - 1);
  if (std::abs(lo.x() - cell.center.x()) > half_w || std::abs(hi.x() - cell.center.x()) > half_w ||
      std::abs(lo.y() - cell.center.z()) > half_l || std::abs(hi.y() - cell.center.z()) > half_l) {
    throw ScenarioError("pixel grid extends outside the cell cross-section");
  }
  const double cell_top = cell.center.y() + cell.dimensions.z() / 2.0;
  if (scenario.coil.center.y() <= cell_top) {
    throw ScenarioError("RF coil must sit above the cell");
  }
  for (const auto& t : scenario.targets) {
    if (t.height_y <= cell_top || t.height_y >= scenario.coil.center.y()) {
      throw ScenarioError("target must sit strictly between cell and coil");
    }
  }
  if (scenario.mode.kind == ScanModeKind::FastSinglePoint &&
      (scenario.mode.omega_table.rows() != scenario.grid.n_rows ||
       scenario.mode.omega_table.cols() != scenario.grid.n_cols)) {
    throw ScenarioError("fast mode requires a complete per-pixel omega table");
  }
}

EmiImage run_scan(const ScanScenario& scenario, int n_threads) {
  validate(scenario);

  const auto plan = beamsteer::plan_raster(scenario.grid, scenario.aod_x, scenario.aod_z,
                                           scenario.lens);

  std::vector<fields::EddyMesh> meshes;
  meshes.reserve(scenario.targets.size());
  for (const auto& target : scenario.targets) {
    meshes.push_back(fields::induce(
        fields::mesh_plate(target, scenario.mesh_pitch, scenario.coil.drive_omega),
        scenario.coil));
  }

  EmiImage image(scenario.grid);
  const bool fast = scenario.mode.kind == ScanModeKind::FastSinglePoint;
  const std::uint64_t mode_tag = fast ? kFastTag : kFullTag;
  const double sensor_y = scenario.magnetometer.cell.center.y();

  auto process_pixel = [&](int pixel) {
    const int row = pixel / scenario.grid.n_cols;
    const int col = pixel % scenario.grid.n_cols;
    const auto& entry = plan.entries[static_cast<std::size_t>(pixel)];
    const double px = beamsteer::beam_position(scenario.lens, scenario.aod_x,
                                               entry.drive_freq_x - scenario.aod_x.center_freq);
    const double pz = beamsteer::beam_position(scenario.lens, scenario.aod_z,
                                               entry.drive_freq_z - scenario.aod_z.center_freq);
    const fields::Vec3 center(px, sensor_y, pz);

    const auto voxel = magnetometer::SensorVoxel::at(center, scenario.magnetometer.cell,
                                                     scenario.voxel_template.pump_diameter,
                                                     scenario.voxel_template.probe_diameter);
    const std::complex<double> b =
        sampled_drive(scenario.coil, meshes, center, voxel.effective_radius);
    const double b_ref =
        std::abs(sampled_drive(scenario.coil, {}, center, voxel.effective_radius));

    const auto params =
        magnetometer::resonance_at(voxel, scenario.magnetometer, scenario.pixel_amplitude);

    lockin::NoiseSpec pixel_noise = scenario.noise;
    pixel_noise.seed = rng::derive(scenario.noise.seed, mode_tag,
                                   static_cast<std::uint64_t>(pixel));

    image.steer_s(row, col) = plan.steering_time_per_move;
    image.control_s(row, col) = scenario.control_latency;

    if (!fast) {
      const double nominal_omega0 =
          magnetometer::larmor_frequency(scenario.magnetometer.bias.nominal_bias);
      const auto record = lockin::run_sweep(params, scenario.drive, nominal_omega0,
                                            5.0 * params.gamma_fwhm, scenario.mode.n_points, b,
                                            b_ref, pixel_noise, scenario.time_domain);
      const auto fit = fitting::fit_resonance(record);
      image.r(row, col) = fit.r_peak;
      image.phi(row, col) = fit.phi_peak;
      image.omega0(row, col) = fit.params.omega0;
      image.gamma(row, col) = fit.params.gamma_fwhm;
      image.converged(row, col) = fit.converged ? 1 : 0;
      image.measure_s(row, col) = scenario.mode.n_points * scenario.drive.duration;
    } else {
      lockin::DriveConfig drive = scenario.drive;
      drive.omega_rf = scenario.mode.omega_table(row, col);
      drive.duration = scenario.mode.dwell;
      const auto [x, y] = scenario.time_domain
                              ? lockin::measure(params, drive, b, b_ref, pixel_noise)
                              : lockin::measure_analytic(params, drive, b, b_ref, pixel_noise);
      image.r(row, col) = std::hypot(x - params.x_offset, y - params.y_offset);
      image.phi(row, col) = std::atan2(x - params.x_offset, y - params.y_offset);
      image.omega0(row, col) = drive.omega_rf;
      image.gamma(row, col) = params.gamma_fwhm;
      image.converged(row, col) = 1;
      image.measure_s(row, col) = scenario.mode.dwell;
    }
  };

  const int n_pixels = scenario.grid.pixel_count();
  int workers = n_threads > 0 ? n_threads
                              : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n_pixels));
  if (workers == 1) {
    for (int pixel = 0; pixel < n_pixels; ++pixel) {
      process_pixel(pixel);
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        try {
          for (int pixel = next.fetch_add(1); pixel < n_pixels; pixel = next.fetch_add(1)) {
            process_pixel(pixel);
          }
        } catch (...) {
          const std::scoped_lock lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    if (error) {
      std::rethrow_exception(error);
    }
  }
  return image;
}

EmiImage normalize(const EmiImage& background, const EmiImage& target) {
  if (background.grid.n_rows != target.grid.n_rows ||
      background.grid.n_cols != target.grid.n_cols) {
    throw GridMismatch("background and target grids differ");
  }
  EmiImage out = target;
  for (int row = 0; row < out.grid.n_rows; ++row) {
    for (int col = 0; col < out.grid.n_cols; ++col) {
      if (target.r(row, col) == 0.0) {
        out.r(row, col) = 0.0;
        out.converged(row, col) = 0;
      } else {
        out.r(row, col) = background.r(row, col) / target.r(row, col);
      }
    }
  }
  return out;
}

EmiImage smooth(const EmiImage& image, int radius) {
  if (radius <= 0) {
    return image;
  }
  const int size = 2 * radius + 1;
  Eigen::ArrayXXd kernel(size, size);
  const double sigma = static_cast<double>(radius);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double di = i - radius;
      const double dj = j - radius;
      kernel(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  kernel /= kernel.sum();

  EmiImage out = image;
  for (int row = 0; row < image.grid.n_rows; ++row) {
    for (int col = 0; col < image.grid.n_cols; ++col) {
      double acc = 0.0;
      double weight = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
          const int rr = row + i;
          const int cc = col + j;
          if (rr < 0 || rr >= image.grid.n_rows || cc < 0 || cc >= image.grid.n_cols) {
            continue;
          }
          const double w = kernel(i + radius, j + radius);
          acc += w * image.r(rr, cc);
          weight += w;
        }
      }
      out.r(row, col) = acc / weight;
    }
  }
  return out;
}

TimingSummary timing_report(const EmiImage& image) {
  TimingSummary s;
  const double n = static_cast<double>(image.grid.pixel_count());
  s.total_steer = image.steer_s.sum();
  s.total_control = image.control_s.sum();
  s.total_measure = image.measure_s.sum();
  s.mean_steer = s.total_steer / n;
  s.mean_control = s.total_control / n;
  s.mean_measure = s.total_measure / n;
  s.dominant = "measure";
  if (s.total_steer >= s.total_control && s.total_steer >= s.total_measure) {
    s.dominant = "steer";
  } else if (s.total_control >= s.total_measure) {
    s.dominant = "control";
  }
  return s;
}

} // namespace emiscan::imaging
