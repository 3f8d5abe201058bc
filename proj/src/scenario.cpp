#include "emiscan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emiscan/constants.hpp"

namespace emiscan::scenario {

namespace {

using json = nlohmann::ordered_json;

// unit factors shared by parse and serialize so the round trip is exact
constexpr double kFromMm = 1e-3;
constexpr double kFromKhz = kTwoPi * 1e3;
constexpr double kFromMG = 1e-7;
constexpr double kFromNm = 1e-9;
constexpr double kFromMhz = 1e6;
constexpr double kFromUs = 1e-6;
constexpr double kFromMs = 1e-3;
constexpr double kUnity = 1.0;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw ParseError("unknown key '" + key + "' in " + where);
    }
  }
}

// Assign si = value * factor when the key is present; absent keys leave the
// stored SI value untouched so defaults never churn through a conversion.
void set_num(const json& obj, const std::string& key, double factor, double& si) {
  if (!obj.contains(key)) {
    return;
  }
  if (!obj[key].is_number()) {
    throw ParseError("key '" + key + "' must be a number");
  }
  si = obj[key].get<double>() * factor;
}

void set_int(const json& obj, const std::string& key, int& value) {
  if (!obj.contains(key)) {
    return;
  }
  if (!obj[key].is_number()) {
    throw ParseError("key '" + key + "' must be a number");
  }
  value = obj[key].get<int>();
}

// User-unit value whose parse conversion reproduces `si` bit-exactly. The
// nearest such preimage is within a couple of ulps of the plain quotient.
double user_unit(double si, double factor) {
  double u = si / factor;
  if (u * factor == si) {
    return u;
  }
  for (const double towards : {std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()}) {
    double v = u;
    for (int i = 0; i < 4; ++i) {
      v = std::nextafter(v, towards);
      if (v * factor == si) {
        return v;
      }
    }
  }
  return u;
}

json vec3_user(const fields::Vec3& v, double factor) {
  return {user_unit(v.x(), factor), user_unit(v.y(), factor), user_unit(v.z(), factor)};
}

imaging::ScanScenario parse_json(const json& doc) {
  imaging::ScanScenario sc = default_scenario();
  reject_unknown(doc,
                 {"cell", "coil", "bias", "amplitude_profile", "voxel", "targets", "grid",
                  "aod", "lens", "drive", "noise", "mode", "control_latency_us",
                  "mesh_pitch_mm", "pixel_amplitude_v", "time_domain"},
                 "scenario");

  if (doc.contains("cell")) {
    const json& c = doc["cell"];
    reject_unknown(c, {"dimensions_mm", "center_mm", "diffusion_length_mm"}, "cell");
    auto& cell = sc.magnetometer.cell;
    if (c.contains("dimensions_mm")) {
      for (int i = 0; i < 3; ++i) {
        cell.dimensions[i] = c["dimensions_mm"].at(i).get<double>() * kFromMm;
      }
    }
    if (c.contains("center_mm")) {
      for (int i = 0; i < 3; ++i) {
        cell.center[i] = c["center_mm"].at(i).get<double>() * kFromMm;
      }
    }
    set_num(c, "diffusion_length_mm", kFromMm, cell.diffusion_length);
  }

  if (doc.contains("coil")) {
    const json& c = doc["coil"];
    reject_unknown(c, {"side_mm", "center_mm", "normal", "current_a", "drive_freq_khz"},
                   "coil");
    set_num(c, "side_mm", kFromMm, sc.coil.side_length);
    if (c.contains("center_mm")) {
      for (int i = 0; i < 3; ++i) {
        sc.coil.center[i] = c["center_mm"].at(i).get<double>() * kFromMm;
      }
    }
    if (c.contains("normal")) {
      for (int i = 0; i < 3; ++i) {
        sc.coil.normal[i] = c["normal"].at(i).get<double>();
      }
      sc.coil.normal.normalize();
    }
    set_num(c, "current_a", kUnity, sc.coil.current_amplitude);
    set_num(c, "drive_freq_khz", kFromKhz, sc.coil.drive_omega);
  }

  if (doc.contains("bias")) {
    const json& b = doc["bias"];
    reject_unknown(b, {"nominal_mG", "inhomogeneity_khz", "area_half_width_mm"}, "bias");
    auto& bias = sc.magnetometer.bias;
    set_num(b, "nominal_mG", kFromMG, bias.nominal_bias);
    set_num(b, "inhomogeneity_khz", kFromKhz, bias.max_shift);
    set_num(b, "area_half_width_mm", kFromMm, bias.area_half_width);
    sc.magnetometer.profile.area_half_width = bias.area_half_width;
  }

  if (doc.contains("amplitude_profile")) {
    const json& a = doc["amplitude_profile"];
    reject_unknown(a, {"corner_value"}, "amplitude_profile");
    set_num(a, "corner_value", kUnity, sc.magnetometer.profile.corner_value);
  }

  if (doc.contains("voxel")) {
    const json& v = doc["voxel"];
    reject_unknown(v, {"pump_diameter_mm", "probe_diameter_mm"}, "voxel");
    set_num(v, "pump_diameter_mm", kFromMm, sc.voxel_template.pump_diameter);
    set_num(v, "probe_diameter_mm", kFromMm, sc.voxel_template.probe_diameter);
  }

  if (doc.contains("targets")) {
    sc.targets.clear();
    for (const json& t : doc["targets"]) {
      reject_unknown(t,
                     {"outline_mm", "thickness_mm", "height_y_mm", "conductivity_s_per_m",
                      "relative_permeability"},
                     "target");
      fields::TargetPlate plate;
      if (!t.contains("outline_mm")) {
        throw ParseError("target requires outline_mm");
      }
      for (const json& v : t["outline_mm"]) {
        plate.outline.emplace_back(v.at(0).get<double>() * kFromMm,
                                   v.at(1).get<double>() * kFromMm);
      }
      plate.thickness = 1e-3;
      plate.height_y = 22e-3;
      plate.material = {5.96e7, 1.0};
      set_num(t, "thickness_mm", kFromMm, plate.thickness);
      set_num(t, "height_y_mm", kFromMm, plate.height_y);
      set_num(t, "conductivity_s_per_m", kUnity, plate.material.conductivity);
      set_num(t, "relative_permeability", kUnity, plate.material.relative_permeability);
      sc.targets.push_back(std::move(plate));
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    reject_unknown(g, {"rows", "cols", "step_mm"}, "grid");
    int rows = sc.grid.n_rows;
    int cols = sc.grid.n_cols;
    double step = sc.grid.step;
    set_int(g, "rows", rows);
    set_int(g, "cols", cols);
    set_num(g, "step_mm", kFromMm, step);
    sc.grid = beamsteer::PixelGrid::centered(rows, cols, step);
  }

  if (doc.contains("aod")) {
    const json& a = doc["aod"];
    reject_unknown(a,
                   {"acoustic_speed_m_per_s", "refractive_index", "wavelength_nm",
                    "center_freq_mhz", "span_mhz", "rise_time_us"},
                   "aod");
    auto apply = [&](beamsteer::AodSpec& aod) {
      set_num(a, "acoustic_speed_m_per_s", kUnity, aod.acoustic_speed);
      set_num(a, "refractive_index", kUnity, aod.refractive_index);
      set_num(a, "wavelength_nm", kFromNm, aod.wavelength);
      set_num(a, "center_freq_mhz", kFromMhz, aod.center_freq);
      set_num(a, "span_mhz", kFromMhz, aod.freq_span);
      set_num(a, "rise_time_us", kFromUs, aod.rise_time);
    };
    apply(sc.aod_x);
    apply(sc.aod_z);
  }

  if (doc.contains("lens")) {
    const json& l = doc["lens"];
    reject_unknown(l, {"focal_length_mm"}, "lens");
    set_num(l, "focal_length_mm", kFromMm, sc.lens.focal_length);
  }

  if (doc.contains("drive")) {
    const json& d = doc["drive"];
    reject_unknown(d, {"sample_rate_mhz", "lp_time_constant_ms", "dwell_ms", "n_points"},
                   "drive");
    set_num(d, "sample_rate_mhz", kFromMhz, sc.drive.sample_rate);
    set_num(d, "lp_time_constant_ms", kFromMs, sc.drive.lp_time_constant);
    set_num(d, "dwell_ms", kFromMs, sc.drive.duration);
    set_int(d, "n_points", sc.mode.n_points);
  }

  if (doc.contains("noise")) {
    const json& n = doc["noise"];
    reject_unknown(n, {"rms_v", "seed"}, "noise");
    set_num(n, "rms_v", kUnity, sc.noise.rms_voltage);
    if (n.contains("seed")) {
      sc.noise.seed = n["seed"].get<std::uint64_t>();
    }
  }

  if (doc.contains("mode")) {
    const json& m = doc["mode"];
    reject_unknown(m, {"type", "fast_dwell_ms"}, "mode");
    if (m.contains("type")) {
      const std::string type = m["type"].get<std::string>();
      if (type == "full") {
        sc.mode.kind = imaging::ScanModeKind::FullSweep;
      } else if (type == "fast") {
        sc.mode.kind = imaging::ScanModeKind::FastSinglePoint;
      } else {
        throw ParseError("mode.type must be 'full' or 'fast'");
      }
    }
    set_num(m, "fast_dwell_ms", kFromMs, sc.mode.dwell);
  }

  set_num(doc, "control_latency_us", kFromUs, sc.control_latency);
  set_num(doc, "mesh_pitch_mm", kFromMm, sc.mesh_pitch);
  set_num(doc, "pixel_amplitude_v", kUnity, sc.pixel_amplitude);
  if (doc.contains("time_domain")) {
    sc.time_domain = doc["time_domain"].get<bool>();
  }
  return sc;
}

} // namespace

imaging::ScanScenario default_scenario() {
  imaging::ScanScenario sc;
  sc.coil.drive_omega = magnetometer::larmor_frequency(sc.magnetometer.bias.nominal_bias);
  sc.noise.rms_voltage = 0.15;
  sc.noise.seed = 1;
  return sc;
}

imaging::ScanScenario parse(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario parse failure: ") + e.what());
  }
  try {
    return parse_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("scenario structure failure: ") + e.what());
  }
}

imaging::ScanScenario load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open scenario file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string serialize(const imaging::ScanScenario& sc) {
  json doc;
  doc["cell"] = {
      {"dimensions_mm", vec3_user(sc.magnetometer.cell.dimensions, kFromMm)},
      {"center_mm", vec3_user(sc.magnetometer.cell.center, kFromMm)},
      {"diffusion_length_mm", user_unit(sc.magnetometer.cell.diffusion_length, kFromMm)},
  };
  doc["coil"] = {
      {"side_mm", user_unit(sc.coil.side_length, kFromMm)},
      {"center_mm", vec3_user(sc.coil.center, kFromMm)},
      {"normal", {sc.coil.normal.x(), sc.coil.normal.y(), sc.coil.normal.z()}},
      {"current_a", sc.coil.current_amplitude},
      {"drive_freq_khz", user_unit(sc.coil.drive_omega, kFromKhz)},
  };
  doc["bias"] = {
      {"nominal_mG", user_unit(sc.magnetometer.bias.nominal_bias, kFromMG)},
      {"inhomogeneity_khz", user_unit(sc.magnetometer.bias.max_shift, kFromKhz)},
      {"area_half_width_mm", user_unit(sc.magnetometer.bias.area_half_width, kFromMm)},
  };
  doc["amplitude_profile"] = {{"corner_value", sc.magnetometer.profile.corner_value}};
  doc["voxel"] = {
      {"pump_diameter_mm", user_unit(sc.voxel_template.pump_diameter, kFromMm)},
      {"probe_diameter_mm", user_unit(sc.voxel_template.probe_diameter, kFromMm)},
  };
  doc["targets"] = json::array();
  for (const auto& t : sc.targets) {
    json outline = json::array();
    for (const auto& v : t.outline) {
      outline.push_back({user_unit(v.x(), kFromMm), user_unit(v.y(), kFromMm)});
    }
    doc["targets"].push_back({
        {"outline_mm", outline},
        {"thickness_mm", user_unit(t.thickness, kFromMm)},
        {"height_y_mm", user_unit(t.height_y, kFromMm)},
        {"conductivity_s_per_m", t.material.conductivity},
        {"relative_permeability", t.material.relative_permeability},
    });
  }
  doc["grid"] = {{"rows", sc.grid.n_rows},
                 {"cols", sc.grid.n_cols},
                 {"step_mm", user_unit(sc.grid.step, kFromMm)}};
  doc["aod"] = {
      {"acoustic_speed_m_per_s", sc.aod_x.acoustic_speed},
      {"refractive_index", sc.aod_x.refractive_index},
      {"wavelength_nm", user_unit(sc.aod_x.wavelength, kFromNm)},
      {"center_freq_mhz", user_unit(sc.aod_x.center_freq, kFromMhz)},
      {"span_mhz", user_unit(sc.aod_x.freq_span, kFromMhz)},
      {"rise_time_us", user_unit(sc.aod_x.rise_time, kFromUs)},
  };
  doc["lens"] = {{"focal_length_mm", user_unit(sc.lens.focal_length, kFromMm)}};
  doc["drive"] = {
      {"sample_rate_mhz", user_unit(sc.drive.sample_rate, kFromMhz)},
      {"lp_time_constant_ms", user_unit(sc.drive.lp_time_constant, kFromMs)},
      {"dwell_ms", user_unit(sc.drive.duration, kFromMs)},
      {"n_points", sc.mode.n_points},
  };
  doc["noise"] = {{"rms_v", sc.noise.rms_voltage}, {"seed", sc.noise.seed}};
  doc["mode"] = {
      {"type", sc.mode.kind == imaging::ScanModeKind::FastSinglePoint ? "fast" : "full"},
      {"fast_dwell_ms", user_unit(sc.mode.dwell, kFromMs)},
  };
  doc["control_latency_us"] = user_unit(sc.control_latency, kFromUs);
  doc["mesh_pitch_mm"] = user_unit(sc.mesh_pitch, kFromMm);
  doc["pixel_amplitude_v"] = sc.pixel_amplitude;
  doc["time_domain"] = sc.time_domain;
  return doc.dump(2);
}

std::uint64_t hash(const imaging::ScanScenario& scenario) {
  const std::string text = serialize(scenario);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace emiscan::scenario
