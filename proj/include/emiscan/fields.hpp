#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "emiscan/errors.hpp"

namespace emiscan::fields {

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

// Complex magnetic field amplitude at a single drive frequency.
struct PhasorField {
  CVec3 b{CVec3::Zero()}; // [T]
  double omega{0.0};      // [rad/s]

  Vec3 re() const { return b.real(); }
  Vec3 im() const { return b.imag(); }
  double magnitude() const { return b.norm(); }
};

// Square RF coil, four straight segments.
struct CoilSpec {
  double side_length{55e-3};      // [m]
  Vec3 center{0.0, 35e-3, 0.0};   // [m]
  Vec3 normal{0.0, 1.0, 0.0};     // unit vector
  double current_amplitude{1.0};  // [A]
  double drive_omega{0.0};        // [rad/s]
};

struct Material {
  double conductivity{0.0};         // [S/m]
  double relative_permeability{1.0};
};

// Thin conductive plate lying in an x-z plane at y = height_y.
struct TargetPlate {
  std::vector<Eigen::Vector2d> outline; // (x, z) vertices [m]
  double thickness{1e-3};               // [m]
  double height_y{0.0};                 // [m]
  Material material;
};

struct LoopCell {
  Vec3 center{Vec3::Zero()};
  double area{0.0};            // [m^2]
  double resistance{0.0};      // [ohm]
  double self_inductance{0.0}; // [H]
  std::complex<double> induced_moment{0.0, 0.0}; // [A m^2], along the plate normal
};

struct EddyMesh {
  std::vector<LoopCell> cells;
  double cell_pitch{0.0};    // [m]
  Vec3 normal{0.0, 1.0, 0.0}; // plate normal, shared by all cells
};

// cell size at which the per-loop impedance formulas are evaluated; keeps the
// induced response density independent of the mesh resolution
inline constexpr double kReferenceCellPitch = 2.5e-3;

double polygon_area(const std::vector<Eigen::Vector2d>& outline);
bool point_in_polygon(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& outline);

// Biot-Savart field of the four coil segments. Purely real phasor, phase 0.
PhasorField coil_field(const CoilSpec& coil, const Vec3& point);

// sqrt(2 / (mu0 mu_r sigma omega))
double skin_depth(const Material& material, double omega);

// Discretize a plate into independent square current loops. The drive
// frequency enters through the skin-depth limited effective thickness.
EddyMesh mesh_plate(const TargetPlate& plate, double pitch, double omega);

// Populate induced moments: I = -i w Phi / (R + i w L) per cell, no
// cell-to-cell coupling.
EddyMesh induce(EddyMesh mesh, const CoilSpec& coil);

// Superposition of the complex dipole fields of all induced moments.
PhasorField secondary_field(const EddyMesh& mesh, const Vec3& point);

// coil_field plus the secondary fields of any meshes present.
PhasorField total_rf_field(const CoilSpec& coil, const std::vector<EddyMesh>& meshes,
                           const Vec3& point);

} // namespace emiscan::fields
