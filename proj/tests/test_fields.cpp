#include <doctest.h>

#include <cmath>
#include <complex>

#include "emiscan/constants.hpp"
#include "emiscan/fields.hpp"

using namespace emiscan;
using namespace emiscan::fields;

namespace {

// Independent oracle: midpoint-rule line integration of the Biot-Savart
// kernel over the four coil segments.
Vec3 coil_field_quadrature(const CoilSpec& coil, const Vec3& point, int nodes_per_segment) {
  const Vec3 n = coil.normal.normalized();
  Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = (seed - seed.dot(n) * n).normalized();
  const Vec3 e2 = n.cross(e1);
  const double h = coil.side_length / 2.0;
  const Vec3 corners[4] = {
      coil.center + h * (e1 + e2),
      coil.center + h * (-e1 + e2),
      coil.center + h * (-e1 - e2),
      coil.center + h * (e1 - e2),
  };
  Vec3 b = Vec3::Zero();
  for (int s = 0; s < 4; ++s) {
    const Vec3 p1 = corners[s];
    const Vec3 p2 = corners[(s + 1) % 4];
    const Vec3 dl = (p2 - p1) / nodes_per_segment;
    for (int k = 0; k < nodes_per_segment; ++k) {
      const Vec3 mid = p1 + (k + 0.5) * (p2 - p1) / nodes_per_segment;
      const Vec3 r = point - mid;
      const double d = r.norm();
      b += kMu0 * coil.current_amplitude / (4.0 * kPi) * dl.cross(r) / (d * d * d);
    }
  }
  return b;
}

CoilSpec default_coil() {
  CoilSpec coil;
  coil.side_length = 55e-3;
  coil.center = {0.0, 35e-3, 0.0};
  coil.normal = {0.0, 1.0, 0.0};
  coil.current_amplitude = 1.0;
  coil.drive_omega = kTwoPi * 105e3;
  return coil;
}

TargetPlate square_plate(double side = 25e-3, double thickness = 1e-3, double y = 22e-3) {
  TargetPlate plate;
  const double h = side / 2.0;
  plate.outline = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
  plate.thickness = thickness;
  plate.height_y = y;
  plate.material = {5.96e7, 1.0};
  return plate;
}

} // namespace

TEST_CASE("coil field at the square center matches the closed form") {
  CoilSpec coil = default_coil();
  const Vec3 center = coil.center;
  const PhasorField f = coil_field(coil, center);
  const double expected = 2.0 * std::sqrt(2.0) * kMu0 * coil.current_amplitude /
                          (kPi * coil.side_length);
  CHECK(f.magnitude() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(f.magnitude() == doctest::Approx(2.057e-5).epsilon(1e-3));
  CHECK(f.re().y() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(f.im().norm() == 0.0);
}

TEST_CASE("coil field agrees with the quadrature oracle off center") {
  CoilSpec coil = default_coil();
  const Vec3 points[] = {
      coil.center,
      {10e-3, 0.0, -5e-3},
      {-17e-3, 0.0, 17e-3},
      {30e-3, 60e-3, 10e-3},
  };
  for (const Vec3& p : points) {
    const Vec3 expected = coil_field_quadrature(coil, p, 20000);
    const Vec3 got = coil_field(coil, p).re();
    CHECK((got - expected).norm() <= 1e-6 * expected.norm());
  }
}

TEST_CASE("coil field is linear in current and vanishes at zero current") {
  CoilSpec coil = default_coil();
  const Vec3 p{5e-3, 0.0, 2e-3};
  const Vec3 b1 = coil_field(coil, p).re();
  coil.current_amplitude = 2.0;
  const Vec3 b2 = coil_field(coil, p).re();
  CHECK((b2 - 2.0 * b1).norm() <= 1e-15 * b2.norm());
  coil.current_amplitude = 0.0;
  CHECK(coil_field(coil, coil.center).magnitude() == 0.0);
}

TEST_CASE("coil field magnitude is invariant under 90 degree rotation") {
  CoilSpec coil = default_coil();
  const Vec3 p{8e-3, 10e-3, 3e-3};
  // rotate the field point by 90 degrees about the coil normal through its center
  const Vec3 rel = p - coil.center;
  const Vec3 rotated = coil.center + Vec3(rel.z(), rel.y(), -rel.x());
  const double m1 = coil_field(coil, p).magnitude();
  const double m2 = coil_field(coil, rotated).magnitude();
  CHECK(std::abs(m1 - m2) <= 1e-12 * m1);
}

TEST_CASE("field point on a coil segment is rejected") {
  CoilSpec coil = default_coil();
  const Vec3 on_wire = coil.center + Vec3(coil.side_length / 2.0, 0.0, 0.0);
  CHECK_THROWS_AS((void)coil_field(coil, on_wire), PointOnConductor);
}

TEST_CASE("skin depth reproduces the copper value at 105 kHz") {
  const Material cu{5.96e7, 1.0};
  const double d = skin_depth(cu, kTwoPi * 105e3);
  CHECK(d == doctest::Approx(201e-6).epsilon(0.005));
  CHECK(d >= 200e-6);
  CHECK(d <= 202e-6);
}

TEST_CASE("skin depth halves when omega quadruples") {
  const Material cu{5.96e7, 1.0};
  const double w = kTwoPi * 105e3;
  CHECK(skin_depth(cu, 4.0 * w) == doctest::Approx(skin_depth(cu, w) / 2.0).epsilon(1e-14));
}

TEST_CASE("the 2 kHz bias spread changes the skin depth by under 2 percent") {
  const Material cu{5.96e7, 1.0};
  const double dp = skin_depth(cu, kTwoPi * 107e3);
  const double dm = skin_depth(cu, kTwoPi * 103e3);
  CHECK(std::abs(dp - dm) / skin_depth(cu, kTwoPi * 105e3) < 0.02);
}

TEST_CASE("skin depth of an insulator is rejected") {
  CHECK_THROWS_AS((void)skin_depth(Material{0.0, 1.0}, kTwoPi * 105e3), NonConductive);
}

TEST_CASE("meshing a 25 mm square at 5 mm pitch yields 25 cells") {
  const auto mesh = mesh_plate(square_plate(), 5e-3, kTwoPi * 105e3);
  CHECK(mesh.cells.size() == 25);
  for (const auto& c : mesh.cells) {
    CHECK(c.area == doctest::Approx(25e-6));
    CHECK(c.resistance > 0.0);
    CHECK(c.self_inductance > 0.0);
    CHECK(c.induced_moment == std::complex<double>(0.0, 0.0));
  }
}

TEST_CASE("triangle cell count matches a brute-force point-in-polygon scan") {
  TargetPlate tri = square_plate();
  tri.outline = {{-12.5e-3, -12.5e-3}, {12.5e-3, -12.5e-3}, {-12.5e-3, 12.5e-3}};
  const double pitch = 5e-3;
  const auto mesh = mesh_plate(tri, pitch, kTwoPi * 105e3);

  // independent oracle: half-plane sign test over the same candidate lattice
  auto inside = [&](double x, double z) {
    const auto& o = tri.outline;
    double prev = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      const auto& a = o[i];
      const auto& b = o[(i + 1) % o.size()];
      const double cross = (b.x() - a.x()) * (z - a.y()) - (b.y() - a.y()) * (x - a.x());
      if (cross == 0.0) {
        return false; // centers on the boundary are not meshed
      }
      if (prev != 0.0 && (cross > 0.0) != (prev > 0.0)) {
        return false;
      }
      prev = cross;
    }
    return true;
  };
  int expected = 0;
  for (int iz = 0; iz < 5; ++iz) {
    for (int ix = 0; ix < 5; ++ix) {
      if (inside(-12.5e-3 + (ix + 0.5) * pitch, -12.5e-3 + (iz + 0.5) * pitch)) {
        ++expected;
      }
    }
  }
  CHECK(static_cast<int>(mesh.cells.size()) == expected);
}

TEST_CASE("oversized pitch is rejected") {
  CHECK_THROWS_AS((void)mesh_plate(square_plate(), 30e-3, kTwoPi * 105e3), DegenerateOutline);
}

TEST_CASE("degenerate outline is rejected") {
  TargetPlate flat = square_plate();
  flat.outline = {{0, 0}, {1e-2, 0}, {2e-2, 0}};
  CHECK_THROWS_AS((void)mesh_plate(flat, 1e-3, kTwoPi * 105e3), DegenerateOutline);
}

TEST_CASE("single-cell induction matches scalar complex arithmetic") {
  CoilSpec coil = default_coil();
  EddyMesh mesh;
  mesh.cell_pitch = 2.5e-3;
  LoopCell cell;
  cell.center = {0.0, 22e-3, 0.0};
  cell.area = 6.25e-6;
  cell.resistance = 1.3e-3;
  cell.self_inductance = 4.6e-9;
  mesh.cells.push_back(cell);

  const auto out = induce(mesh, coil);
  const double b_perp = coil_field(coil, cell.center).re().y();
  const std::complex<double> j(0.0, 1.0);
  const double w = coil.drive_omega;
  const std::complex<double> expected =
      -j * w * b_perp * cell.area / (cell.resistance + j * w * cell.self_inductance) * cell.area;
  CHECK(std::abs(out.cells[0].induced_moment - expected) <= 1e-15 * std::abs(expected));
}

TEST_CASE("an insulator produces vanishing moments") {
  CoilSpec coil = default_coil();
  TargetPlate plate = square_plate();
  plate.material.conductivity = 1e-3; // R -> huge
  const auto mesh = induce(mesh_plate(plate, 5e-3, coil.drive_omega), coil);
  const auto good = induce(mesh_plate(square_plate(), 5e-3, coil.drive_omega), coil);
  for (std::size_t i = 0; i < mesh.cells.size(); ++i) {
    CHECK(std::abs(mesh.cells[i].induced_moment) <
          1e-6 * std::abs(good.cells[i].induced_moment));
  }
}

TEST_CASE("perfect-conductor limit opposes the driving flux") {
  CoilSpec coil = default_coil();
  EddyMesh mesh;
  mesh.cell_pitch = 2.5e-3;
  LoopCell cell;
  cell.center = {0.0, 22e-3, 0.0};
  cell.area = 6.25e-6;
  cell.resistance = 1e-12; // wL >> R
  cell.self_inductance = 4.6e-9;
  mesh.cells.push_back(cell);
  const auto out = induce(mesh, coil);
  // field-opposing: moment real and opposite in sign to the (positive) flux
  const double phase = std::arg(out.cells[0].induced_moment);
  CHECK(std::abs(std::abs(phase) - kPi) < 1e-6);
}

TEST_CASE("induced moments are linear in coil current") {
  CoilSpec coil = default_coil();
  auto mesh1 = induce(mesh_plate(square_plate(), 5e-3, coil.drive_omega), coil);
  coil.current_amplitude = 3.0;
  auto mesh3 = induce(mesh_plate(square_plate(), 5e-3, coil.drive_omega), coil);
  for (std::size_t i = 0; i < mesh1.cells.size(); ++i) {
    CHECK(std::abs(mesh3.cells[i].induced_moment - 3.0 * mesh1.cells[i].induced_moment) <=
          1e-12 * std::abs(mesh3.cells[i].induced_moment));
  }
}

TEST_CASE("secondary field of an empty mesh is zero") {
  EddyMesh mesh;
  mesh.cell_pitch = 1e-3;
  CHECK(secondary_field(mesh, {0, 0, 0}).magnitude() == 0.0);
}

TEST_CASE("single dipole on-axis field matches the dipole formula") {
  EddyMesh mesh;
  mesh.cell_pitch = 1e-3;
  LoopCell cell;
  cell.center = Vec3::Zero();
  cell.induced_moment = {1e-3, 0.0};
  mesh.cells.push_back(cell);
  const double d = 20e-3;
  const PhasorField f = secondary_field(mesh, {0.0, d, 0.0});
  const double expected = kMu0 * 1e-3 / (2.0 * kPi * d * d * d);
  CHECK(f.re().y() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(f.re().x()) < 1e-18);
}

TEST_CASE("symmetric dipole pair cancels transverse components at the midpoint") {
  EddyMesh mesh;
  mesh.cell_pitch = 1e-3;
  for (double x : {-5e-3, 5e-3}) {
    LoopCell cell;
    cell.center = {x, 0.0, 0.0};
    cell.induced_moment = {2e-4, 1e-4};
    mesh.cells.push_back(cell);
  }
  const PhasorField f = secondary_field(mesh, {0.0, 15e-3, 0.0});
  CHECK(std::abs(f.b.x()) < 1e-18);
  CHECK(std::abs(f.b.z()) < 1e-18);
}

TEST_CASE("on-axis dipole falloff has log-log slope -3") {
  EddyMesh mesh;
  mesh.cell_pitch = 1e-3;
  LoopCell cell;
  cell.center = Vec3::Zero();
  cell.induced_moment = {1e-3, 0.0};
  mesh.cells.push_back(cell);
  const double d1 = 5.0 * mesh.cell_pitch;
  const double d2 = 50.0 * mesh.cell_pitch;
  const double m1 = secondary_field(mesh, {0.0, d1, 0.0}).magnitude();
  const double m2 = secondary_field(mesh, {0.0, d2, 0.0}).magnitude();
  const double slope = (std::log(m2) - std::log(m1)) / (std::log(d2) - std::log(d1));
  CHECK(slope == doctest::Approx(-3.0).epsilon(0.01 / 3.0));
}

TEST_CASE("query too close to a cell is rejected") {
  EddyMesh mesh;
  mesh.cell_pitch = 4e-3;
  LoopCell cell;
  cell.center = Vec3::Zero();
  mesh.cells.push_back(cell);
  CHECK_THROWS_AS((void)secondary_field(mesh, {1e-3, 0.0, 0.0}), TooCloseToSource);
}

TEST_CASE("total field without a target equals the coil field exactly") {
  CoilSpec coil = default_coil();
  const Vec3 p{3e-3, 0.0, -4e-3};
  CHECK(total_rf_field(coil, {}, p).b == coil_field(coil, p).b);
}

TEST_CASE("Lenz opposition reduces the field magnitude beneath a plate") {
  CoilSpec coil = default_coil();
  const auto mesh = induce(mesh_plate(square_plate(), 2.5e-3, coil.drive_omega), coil);
  const Vec3 below{0.0, 0.0, 0.0}; // sensor plane, beneath the plate center
  const double with_target = total_rf_field(coil, {mesh}, below).magnitude();
  const double primary = coil_field(coil, below).magnitude();
  CHECK(with_target < primary);
}

TEST_CASE("two-plate field is the sum of the individual plate fields") {
  CoilSpec coil = default_coil();
  TargetPlate a = square_plate(10e-3);
  TargetPlate b = square_plate(10e-3);
  for (auto& v : b.outline) {
    v.x() += 15e-3;
  }
  const auto ma = induce(mesh_plate(a, 2.5e-3, coil.drive_omega), coil);
  const auto mb = induce(mesh_plate(b, 2.5e-3, coil.drive_omega), coil);
  const Vec3 p{2e-3, 0.0, 1e-3};
  const CVec3 sum = secondary_field(ma, p).b + secondary_field(mb, p).b;
  const CVec3 both = total_rf_field(coil, {ma, mb}, p).b - coil_field(coil, p).b;
  CHECK((both - sum).norm() <= 1e-12 * sum.norm());
}

TEST_CASE("halving the mesh pitch changes the sensed secondary field by under 5 percent") {
  CoilSpec coil = default_coil();
  const auto coarse = induce(mesh_plate(square_plate(), 2.5e-3, coil.drive_omega), coil);
  const auto fine = induce(mesh_plate(square_plate(), 1.25e-3, coil.drive_omega), coil);
  const Vec3 sensor{0.0, 0.0, 0.0};
  const double bc = secondary_field(coarse, sensor).magnitude();
  const double bf = secondary_field(fine, sensor).magnitude();
  CHECK(std::abs(bc - bf) / bf < 0.05);
}
