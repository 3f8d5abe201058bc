#include "emiscan/fields.hpp"

#include <cmath>

#include "emiscan/constants.hpp"

namespace emiscan::fields {

namespace {

// Field of a finite straight segment p1 -> p2 carrying current I, at r.
//   B = mu0 I / (4 pi) * (a x r1) / |a x r1|^2 * (a . r1_hat - a . r2_hat)
// with a = p2 - p1. Reduces to mu0 I / (2 pi rho) for the infinite wire.
Vec3 segment_field(const Vec3& p1, const Vec3& p2, double current, const Vec3& point) {
  const Vec3 a = p2 - p1;
  const Vec3 r1 = point - p1;
  const Vec3 r2 = point - p2;
  const double len = a.norm();

  // distance from the point to the segment
  const double t = std::clamp(r1.dot(a) / (len * len), 0.0, 1.0);
  const double dist = (point - (p1 + t * a)).norm();
  if (dist <= 1e-9) {
    throw PointOnConductor("field point lies on a coil segment");
  }

  const Vec3 cross = a.cross(r1);
  const double c2 = cross.squaredNorm();
  if (c2 == 0.0) {
    return Vec3::Zero(); // on the segment's line but outside it: no field
  }
  const double factor = a.dot(r1.normalized()) - a.dot(r2.normalized());
  return (kMu0 * current / (4.0 * kPi)) * (cross / c2) * factor;
}

// Orthonormal in-plane basis for a coil normal.
std::pair<Vec3, Vec3> plane_basis(const Vec3& normal) {
  Vec3 seed = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  Vec3 e1 = (seed - seed.dot(normal) * normal).normalized();
  Vec3 e2 = normal.cross(e1);
  return {e1, e2};
}

} // namespace

double polygon_area(const std::vector<Eigen::Vector2d>& outline) {
  double twice = 0.0;
  const std::size_t n = outline.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = outline[i];
    const auto& q = outline[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& outline) {
  bool inside = false;
  const std::size_t n = outline.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& a = outline[i];
    const auto& b = outline[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x_cross) {
        inside = !inside;
      }
    }
  }
  return inside;
}

PhasorField coil_field(const CoilSpec& coil, const Vec3& point) {
  const Vec3 n = coil.normal.normalized();
  const auto [e1, e2] = plane_basis(n);
  const double h = coil.side_length / 2.0;

  const Vec3 corners[4] = {
      coil.center + h * (e1 + e2),
      coil.center + h * (-e1 + e2),
      coil.center + h * (-e1 - e2),
      coil.center + h * (e1 - e2),
  };

  Vec3 b = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    b += segment_field(corners[i], corners[(i + 1) % 4], coil.current_amplitude, point);
  }

  PhasorField out;
  out.b = b.cast<std::complex<double>>();
  out.omega = coil.drive_omega;
  return out;
}

double skin_depth(const Material& material, double omega) {
  if (material.conductivity <= 0.0) {
    throw NonConductive("skin depth undefined for zero conductivity");
  }
  return std::sqrt(2.0 / (kMu0 * material.relative_permeability * material.conductivity * omega));
}

EddyMesh mesh_plate(const TargetPlate& plate, double pitch, double omega) {
  if (plate.outline.size() < 3 || polygon_area(plate.outline) <= 0.0) {
    throw DegenerateOutline("plate outline has no area");
  }
  if (pitch <= 0.0) {
    throw DegenerateOutline("mesh pitch must be positive");
  }

  Eigen::Vector2d lo = plate.outline[0];
  Eigen::Vector2d hi = plate.outline[0];
  for (const auto& v : plate.outline) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  if (pitch > (hi - lo).minCoeff()) {
    throw DegenerateOutline("mesh pitch exceeds the plate extent");
  }

  const double t_eff = std::min(plate.thickness, skin_depth(plate.material, omega));
  const double rho = 1.0 / plate.material.conductivity;
  // square loop of side `pitch`, wire cross-section t_eff x pitch/4
  const double resistance = rho * (4.0 * pitch) / (t_eff * pitch / 4.0);
  const double wire_width = pitch / 4.0;
  const double inductance = kMu0 * pitch * (std::log(8.0 * pitch / wire_width) - 2.0);

  EddyMesh mesh;
  mesh.cell_pitch = pitch;
  const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / pitch));
  const int nz = static_cast<int>(std::ceil((hi.y() - lo.y()) / pitch));
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      Eigen::Vector2d c(lo.x() + (ix + 0.5) * pitch, lo.y() + (iz + 0.5) * pitch);
      if (!point_in_polygon(c, plate.outline)) {
        continue;
      }
      LoopCell cell;
      cell.center = Vec3(c.x(), plate.height_y, c.y());
      cell.area = pitch * pitch;
      cell.resistance = resistance;
      cell.self_inductance = inductance;
      mesh.cells.push_back(cell);
    }
  }
  if (mesh.cells.empty()) {
    throw DegenerateOutline("mesh pitch leaves no cells inside the outline");
  }
  return mesh;
}

EddyMesh induce(EddyMesh mesh, const CoilSpec& coil) {
  const double omega = coil.drive_omega;
  const std::complex<double> j(0.0, 1.0);
  // The loop response is evaluated at a fixed reference cell size so the sheet
  // response density (loop current per unit area of plate) does not depend on
  // how finely the plate happens to be meshed. At the reference pitch the
  // scale factors are unity and the per-cell formulas apply verbatim.
  const double scale = kReferenceCellPitch / mesh.cell_pitch;
  for (auto& cell : mesh.cells) {
    const PhasorField primary = coil_field(coil, cell.center);
    // Eigen's dot conjugates the left operand; keep the real vector there.
    const std::complex<double> b_perp = mesh.normal.cast<std::complex<double>>().dot(primary.b);
    const std::complex<double> flux = b_perp * cell.area * scale * scale;
    const std::complex<double> impedance =
        cell.resistance + j * omega * cell.self_inductance * scale;
    const std::complex<double> current = -j * omega * flux / impedance;
    cell.induced_moment = current * cell.area;
  }
  return mesh;
}

PhasorField secondary_field(const EddyMesh& mesh, const Vec3& point) {
  PhasorField out;
  const CVec3 n = mesh.normal.cast<std::complex<double>>();
  for (const auto& cell : mesh.cells) {
    const Vec3 r = point - cell.center;
    const double d = r.norm();
    if (d <= mesh.cell_pitch / 2.0) {
      throw TooCloseToSource("field point inside a mesh cell");
    }
    const Vec3 rhat = r / d;
    const CVec3 m = cell.induced_moment * n;
    const std::complex<double> m_radial = rhat.cast<std::complex<double>>().dot(m);
    out.b += (kMu0 / (4.0 * kPi * d * d * d)) *
             (3.0 * m_radial * rhat.cast<std::complex<double>>() - m);
  }
  return out;
}

PhasorField total_rf_field(const CoilSpec& coil, const std::vector<EddyMesh>& meshes,
                           const Vec3& point) {
  PhasorField total = coil_field(coil, point);
  for (const auto& mesh : meshes) {
    total.b += secondary_field(mesh, point).b;
  }
  return total;
}

} // namespace emiscan::fields
