#include "emiscan/image_io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace emiscan::image_io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(item);
  }
  return out;
}

} // namespace

std::string to_csv(const imaging::EmiImage& image) {
  std::ostringstream out;
  out << "rows,cols,step_m,origin_x_m,origin_z_m\n";
  out << image.grid.n_rows << ',' << image.grid.n_cols << ',' << fmt(image.grid.step) << ','
      << fmt(image.grid.origin.x()) << ',' << fmt(image.grid.origin.y()) << '\n';
  out << "row,col,r,phi,omega0,gamma,converged,steer_s,control_s,measure_s\n";
  for (int row = 0; row < image.grid.n_rows; ++row) {
    for (int col = 0; col < image.grid.n_cols; ++col) {
      out << row << ',' << col << ',' << fmt(image.r(row, col)) << ','
          << fmt(image.phi(row, col)) << ',' << fmt(image.omega0(row, col)) << ','
          << fmt(image.gamma(row, col)) << ',' << image.converged(row, col) << ','
          << fmt(image.steer_s(row, col)) << ',' << fmt(image.control_s(row, col)) << ','
          << fmt(image.measure_s(row, col)) << '\n';
    }
  }
  return out.str();
}

imaging::EmiImage from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line).size() != 5) {
    throw ParseError("bad image CSV: missing grid header");
  }
  if (!std::getline(in, line)) {
    throw ParseError("bad image CSV: missing grid values");
  }
  const auto meta = split(line);
  if (meta.size() != 5) {
    throw ParseError("bad image CSV: malformed grid values");
  }
  beamsteer::PixelGrid grid;
  grid.n_rows = std::stoi(meta[0]);
  grid.n_cols = std::stoi(meta[1]);
  grid.step = std::stod(meta[2]);
  grid.origin = {std::stod(meta[3]), std::stod(meta[4])};

  if (!std::getline(in, line)) {
    throw ParseError("bad image CSV: missing column header");
  }

  imaging::EmiImage image(grid);
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = split(line);
    if (f.size() != 10) {
      throw ParseError("bad image CSV: malformed data row");
    }
    const int row = std::stoi(f[0]);
    const int col = std::stoi(f[1]);
    if (row < 0 || row >= grid.n_rows || col < 0 || col >= grid.n_cols) {
      throw ParseError("bad image CSV: pixel index out of range");
    }
    image.r(row, col) = std::stod(f[2]);
    image.phi(row, col) = std::stod(f[3]);
    image.omega0(row, col) = std::stod(f[4]);
    image.gamma(row, col) = std::stod(f[5]);
    image.converged(row, col) = std::stoi(f[6]);
    image.steer_s(row, col) = std::stod(f[7]);
    image.control_s(row, col) = std::stod(f[8]);
    image.measure_s(row, col) = std::stod(f[9]);
    ++count;
  }
  if (count != grid.n_rows * grid.n_cols) {
    throw ParseError("bad image CSV: pixel count mismatch");
  }
  return image;
}

void write_csv(const imaging::EmiImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out << to_csv(image);
}

imaging::EmiImage read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open image CSV: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

void write_pgm(const imaging::EmiImage& image, const std::string& path) {
  const double lo = image.r.minCoeff();
  const double hi = image.r.maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out << "P5\n" << image.grid.n_cols << ' ' << image.grid.n_rows << "\n255\n";
  for (int row = 0; row < image.grid.n_rows; ++row) {
    for (int col = 0; col < image.grid.n_cols; ++col) {
      const double v = (image.r(row, col) - lo) * scale;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v))));
    }
  }
}

void write_sidecar(const imaging::EmiImage& image, std::uint64_t scenario_hash,
                   std::uint64_t seed, const std::string& path) {
  const auto timing = imaging::timing_report(image);
  nlohmann::ordered_json doc;
  char hash_text[19];
  std::snprintf(hash_text, sizeof(hash_text), "%016" PRIx64, scenario_hash);
  doc["scenario_hash"] = hash_text;
  doc["seed"] = seed;
  doc["channels"] = {
      {"r", {{"min", image.r.minCoeff()}, {"max", image.r.maxCoeff()}}},
      {"phi", {{"min", image.phi.minCoeff()}, {"max", image.phi.maxCoeff()}}},
      {"omega0", {{"min", image.omega0.minCoeff()}, {"max", image.omega0.maxCoeff()}}},
      {"gamma", {{"min", image.gamma.minCoeff()}, {"max", image.gamma.maxCoeff()}}},
  };
  doc["timing"] = {
      {"total_steer_s", timing.total_steer},     {"total_control_s", timing.total_control},
      {"total_measure_s", timing.total_measure}, {"mean_steer_s", timing.mean_steer},
      {"mean_control_s", timing.mean_control},   {"mean_measure_s", timing.mean_measure},
      {"dominant", timing.dominant},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out << doc.dump(2) << '\n';
}

} // namespace emiscan::image_io
