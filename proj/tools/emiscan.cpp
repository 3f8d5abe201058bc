#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "emiscan/constants.hpp"
#include "emiscan/image_io.hpp"
#include "emiscan/scenario.hpp"

namespace fs = std::filesystem;
using namespace emiscan;

namespace {

struct ScanArgs {
  std::string scenario_path;
  std::string out_dir{"."};
  std::string mode;
  std::string background_path;
  std::uint64_t seed{0};
  bool seed_set{false};
  int threads{0};
  bool quiet{false};
};

std::uint64_t env_seed(bool& present) {
  const char* s = std::getenv("EMISCAN_SEED");
  present = s != nullptr;
  return present ? std::strtoull(s, nullptr, 10) : 0;
}

int cmd_scan(const ScanArgs& args) {
  auto scenario = scenario::load(args.scenario_path);

  bool has_env = false;
  const std::uint64_t envv = env_seed(has_env);
  if (args.seed_set) {
    scenario.noise.seed = args.seed;
  } else if (has_env) {
    scenario.noise.seed = envv;
  }

  if (args.mode == "full") {
    scenario.mode.kind = imaging::ScanModeKind::FullSweep;
  } else if (args.mode == "fast") {
    scenario.mode.kind = imaging::ScanModeKind::FastSinglePoint;
  } else if (!args.mode.empty()) {
    throw Error("unknown mode '" + args.mode + "' (expected full or fast)");
  }

  imaging::EmiImage background{};
  bool have_background = !args.background_path.empty();
  if (have_background) {
    background = image_io::read_csv(args.background_path);
  }

  if (scenario.mode.kind == imaging::ScanModeKind::FastSinglePoint) {
    if (!have_background) {
      throw Error("fast mode requires --background to supply the per-pixel omega table");
    }
    scenario.mode.omega_table = background.omega0;
  }

  fs::create_directories(args.out_dir);
  const auto image = imaging::run_scan(scenario, args.threads);
  const std::uint64_t hash = scenario::hash(scenario);

  const fs::path dir(args.out_dir);
  image_io::write_csv(image, (dir / "image.csv").string());
  image_io::write_pgm(image, (dir / "image.pgm").string());
  image_io::write_sidecar(image, hash, scenario.noise.seed, (dir / "image.json").string());

  if (have_background) {
    auto normalized = imaging::normalize(background, image);
    if (scenario.mode.kind == imaging::ScanModeKind::FastSinglePoint) {
      normalized = imaging::smooth(normalized, 1);
    }
    image_io::write_csv(normalized, (dir / "normalized.csv").string());
    image_io::write_pgm(normalized, (dir / "normalized.pgm").string());
    image_io::write_sidecar(normalized, hash, scenario.noise.seed,
                            (dir / "normalized.json").string());
  }

  const auto timing = imaging::timing_report(image);
  {
    std::ofstream out(dir / "timing.txt");
    out << "total_steer_s " << timing.total_steer << '\n'
        << "total_control_s " << timing.total_control << '\n'
        << "total_measure_s " << timing.total_measure << '\n'
        << "mean_steer_s " << timing.mean_steer << '\n'
        << "mean_control_s " << timing.mean_control << '\n'
        << "mean_measure_s " << timing.mean_measure << '\n'
        << "dominant " << timing.dominant << '\n';
  }
  if (!args.quiet) {
    std::cout << "wrote " << (dir / "image.csv").string()
              << (have_background ? " and normalized image" : "") << ", dominant phase: "
              << timing.dominant << '\n';
  }
  return 0;
}

lockin::SweepRecord read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open sweep CSV: " + path);
  }
  std::vector<double> w;
  std::vector<double> x;
  std::vector<double> y;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string a;
    std::string b;
    std::string c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw ParseError("sweep CSV rows must be omega,x,y");
    }
    try {
      w.push_back(std::stod(a));
      x.push_back(std::stod(b));
      y.push_back(std::stod(c));
    } catch (const std::exception&) {
      if (w.empty()) {
        continue; // header row
      }
      throw ParseError("non-numeric value in sweep CSV");
    }
  }
  lockin::SweepRecord record;
  record.omegas = Eigen::Map<Eigen::ArrayXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  record.x = Eigen::Map<Eigen::ArrayXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  record.y = Eigen::Map<Eigen::ArrayXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  for (Eigen::Index i = 0; i + 1 < record.omegas.size(); ++i) {
    if (record.omegas[i + 1] <= record.omegas[i]) {
      throw ParseError("sweep CSV omegas must be strictly increasing");
    }
  }
  return record;
}

int cmd_fit(const std::string& path) {
  const auto record = read_sweep_csv(path);
  const auto fit = fitting::fit_resonance(record);
  nlohmann::ordered_json doc;
  doc["omega0_rad_per_s"] = fit.params.omega0;
  doc["gamma_fwhm_rad_per_s"] = fit.params.gamma_fwhm;
  doc["amplitude_v"] = fit.params.amplitude;
  doc["x_offset_v"] = fit.params.x_offset;
  doc["y_offset_v"] = fit.params.y_offset;
  doc["r_peak_v"] = fit.r_peak;
  doc["phi_peak_rad"] = fit.phi_peak;
  doc["residual_rms_v"] = fit.residual_rms;
  doc["converged"] = fit.converged;
  doc["iterations"] = fit.iterations;
  std::cout << doc.dump(2) << '\n';
  return fit.converged ? 0 : 1;
}

int cmd_verify(bool as_json) {
  struct Check {
    std::string name;
    bool pass;
    std::string detail;
  };
  std::vector<Check> checks;

  beamsteer::AodSpec aod;
  if (const char* s = std::getenv("EMISCAN_ACOUSTIC_SPEED")) {
    aod.acoustic_speed = std::strtod(s, nullptr);
  }
  beamsteer::LensSpec lens{1.0};
  {
    const double per_mhz = beamsteer::beam_position(lens, aod, 1e6) * 1e3;
    const double full = beamsteer::beam_position(lens, aod, 25e6, 1.0) -
                        beamsteer::beam_position(lens, aod, -25e6, 1.0);
    const bool ok =
        std::abs(per_mhz - 1.2) / 1.2 < 1e-3 && std::abs(full * 1e3 - 60.0) < 0.1;
    checks.push_back({"beam_mapping_1p2_mm_per_mhz", ok,
                      std::to_string(per_mhz) + " mm/MHz, span " + std::to_string(full * 1e3) +
                          " mm"});
  }
  {
    fields::Material cu{5.96e7, 1.0};
    const double w0 = kTwoPi * 105e3;
    const double d0 = fields::skin_depth(cu, w0);
    const double dp = fields::skin_depth(cu, kTwoPi * 107e3);
    const double dm = fields::skin_depth(cu, kTwoPi * 103e3);
    const bool ok = d0 >= 200e-6 && d0 <= 202e-6 &&
                    std::abs(dp - dm) / d0 < 0.02;
    checks.push_back({"skin_depth_201_um", ok, std::to_string(d0 * 1e6) + " um"});
  }
  {
    const double w = magnetometer::larmor_frequency(1.5e-5);
    const bool ok = std::abs(w - kTwoPi * 105e3) / (kTwoPi * 105e3) < 1e-12 &&
                    std::abs(magnetometer::larmor_frequency(3.0e-5) - 2.0 * w) < 1e-6;
    checks.push_back({"larmor_105_khz_linear", ok, std::to_string(w / kTwoPi) + " Hz"});
  }
  {
    magnetometer::ResonanceParams p;
    p.omega0 = kTwoPi * 105e3;
    p.gamma_fwhm = kTwoPi * 2.4e3;
    p.amplitude = 1.0;
    const double h = p.gamma_fwhm / 2.0;
    const auto [x_half, y_half] = magnetometer::lineshape(p, p.omega0 + h, 1.0);
    const auto [x_res, y_res] = magnetometer::lineshape(p, p.omega0, 1.0);
    const auto [rl, pl] = fitting::r_phi(p, p.omega0 - 3.0 * h);
    const auto [rr, pr] = fitting::r_phi(p, p.omega0 + 3.0 * h);
    (void)pl;
    (void)pr;
    const bool ok = std::abs(x_half - 0.5) < 1e-9 && std::abs(y_res) < 1e-12 &&
                    std::abs(x_res - 1.0) < 1e-12 && std::abs(rl - rr) < 1e-12;
    checks.push_back({"lineshape_fwhm_identities", ok, "half-max at +/- Gamma/2"});
  }

  bool all = true;
  if (as_json) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      doc.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      all = all && c.pass;
    }
    std::cout << doc.dump(2) << '\n';
  } else {
    for (const auto& c : checks) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
      all = all && c.pass;
    }
  }
  return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"emiscan: raster-scanned atomic-magnetometer induction imaging simulator"};
  app.require_subcommand(1);

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "run a scan scenario and write images");
  scan->add_option("scenario", scan_args.scenario_path, "scenario JSON file")->required();
  scan->add_option("-o,--out", scan_args.out_dir, "output directory");
  scan->add_option("--mode", scan_args.mode, "override scan mode: full | fast");
  scan->add_option("--background", scan_args.background_path,
                   "background image CSV (enables normalization; required for fast mode)");
  auto* seed_opt = scan->add_option("--seed", scan_args.seed, "noise seed override");
  scan->add_option("--threads", scan_args.threads, "worker threads (0 = all)");
  scan->add_flag("--quiet", scan_args.quiet, "suppress progress output");

  std::string fit_path;
  auto* fit = app.add_subcommand("fit", "fit a sweep CSV (omega,x,y) and print JSON");
  fit->add_option("sweep", fit_path, "sweep CSV file")->required();

  bool verify_json = false;
  auto* verify = app.add_subcommand("verify", "run built-in physics self-checks");
  verify->add_flag("--json", verify_json, "machine-readable report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (scan->parsed()) {
      scan_args.seed_set = seed_opt->count() > 0;
      return cmd_scan(scan_args);
    }
    if (fit->parsed()) {
      return cmd_fit(fit_path);
    }
    return cmd_verify(verify_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
