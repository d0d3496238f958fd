// SPDX-License-Identifier: Apache-2.0
#include "tinet/shapes.hpp"

#include <cmath>
#include <stdexcept>

namespace tinet {

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "cube") return ShapeKind::Cube;
  if (name == "cylinder") return ShapeKind::Cylinder;
  if (name == "cone") return ShapeKind::Cone;
  if (name == "torus") return ShapeKind::Torus;
  throw std::invalid_argument("unknown shape kind: " + name);
}

std::string shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cube: return "cube";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Cone: return "cone";
    case ShapeKind::Torus: return "torus";
  }
  throw std::invalid_argument("unknown shape kind enum value");
}

namespace {

Eigen::RowVector3d sample_sphere(Rng& rng) {
  const double z = 1.0 - 2.0 * rng.next_double();
  const double phi = 2.0 * M_PI * rng.next_double();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Eigen::RowVector3d sample_cube(Rng& rng) {
  // Six faces of equal area; half-width 1.
  const std::uint64_t face = rng.next_below(6);
  const double a = 2.0 * rng.next_double() - 1.0;
  const double b = 2.0 * rng.next_double() - 1.0;
  switch (face) {
    case 0: return {1.0, a, b};
    case 1: return {-1.0, a, b};
    case 2: return {a, 1.0, b};
    case 3: return {a, -1.0, b};
    case 4: return {a, b, 1.0};
    default: return {a, b, -1.0};
  }
}

Eigen::RowVector3d sample_cylinder(Rng& rng) {
  // Radius 1, z in [-1, 1], closed by two caps.
  // Areas: lateral 4*pi, caps pi each => lateral fraction 2/3.
  const double region = rng.next_double();
  if (region < 2.0 / 3.0) {
    const double phi = 2.0 * M_PI * rng.next_double();
    const double z = 2.0 * rng.next_double() - 1.0;
    return {std::cos(phi), std::sin(phi), z};
  }
  const double z = region < 5.0 / 6.0 ? 1.0 : -1.0;
  const double r = std::sqrt(rng.next_double());
  const double phi = 2.0 * M_PI * rng.next_double();
  return {r * std::cos(phi), r * std::sin(phi), z};
}

Eigen::RowVector3d sample_cone(Rng& rng) {
  // Apex (0,0,1), base disk radius 1 at z = -1 (slant sqrt(5)).
  // Areas: lateral pi*sqrt(5), base pi.
  static const double lateral_fraction = std::sqrt(5.0) / (1.0 + std::sqrt(5.0));
  const double region = rng.next_double();
  if (region < lateral_fraction) {
    const double s = std::sqrt(rng.next_double()); // area-uniform along slant
    const double phi = 2.0 * M_PI * rng.next_double();
    return {s * std::cos(phi), s * std::sin(phi), 1.0 - 2.0 * s};
  }
  const double r = std::sqrt(rng.next_double());
  const double phi = 2.0 * M_PI * rng.next_double();
  return {r * std::cos(phi), r * std::sin(phi), -1.0};
}

Eigen::RowVector3d sample_torus(Rng& rng) {
  // Major radius 1, minor 0.4. The surface element is proportional to
  // (1 + 0.4 cos(psi)); rejection keeps the sampling area-correct.
  const double kMinor = 0.4;
  double theta, psi;
  do {
    theta = 2.0 * M_PI * rng.next_double();
    psi = 2.0 * M_PI * rng.next_double();
  } while (rng.next_double() > (1.0 + kMinor * std::cos(psi)) / (1.0 + kMinor));
  const double ring = 1.0 + kMinor * std::cos(psi);
  return {ring * std::cos(theta), ring * std::sin(theta), kMinor * std::sin(psi)};
}

} // namespace

PointCloud generate_shape(const SyntheticShapeSpec& spec) {
  if (spec.n < 8) throw std::invalid_argument("generate_shape: need n >= 8");
  Rng rng(spec.seed);
  PointCloud cloud;
  cloud.points.resize(spec.n, 3);
  for (int i = 0; i < spec.n; ++i) {
    switch (spec.kind) {
      case ShapeKind::Sphere: cloud.points.row(i) = sample_sphere(rng); break;
      case ShapeKind::Cube: cloud.points.row(i) = sample_cube(rng); break;
      case ShapeKind::Cylinder: cloud.points.row(i) = sample_cylinder(rng); break;
      case ShapeKind::Cone: cloud.points.row(i) = sample_cone(rng); break;
      case ShapeKind::Torus: cloud.points.row(i) = sample_torus(rng); break;
    }
  }
  // The parametrizations are origin-centered, so scale about the origin
  // rather than the sample centroid: surface relations (unit sphere norms,
  // cube face planes) then survive normalization exactly.
  const double max_norm = cloud.points.rowwise().norm().maxCoeff();
  if (max_norm == 0.0) throw std::invalid_argument("generate_shape: degenerate shape");
  cloud.points /= max_norm;
  return jitter(cloud, spec.jitter_sigma, rng);
}

} // namespace tinet
