// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "tinet/pointcloud.hpp"

namespace tinet {

enum class ShapeKind { Sphere, Cube, Cylinder, Cone, Torus };

ShapeKind parse_shape_kind(const std::string& name); // throws std::invalid_argument
std::string shape_kind_name(ShapeKind kind);

/// Same spec (including seed) always produces a bitwise-identical cloud.
struct SyntheticShapeSpec {
  ShapeKind kind = ShapeKind::Sphere;
  int n = 512;
  std::uint64_t seed = 0;
  double jitter_sigma = 0.0;
};

/// Samples n points uniformly on the shape surface (parametrizations in the
/// README), scales the origin-centered shape so the farthest point sits on
/// the unit sphere, then applies Gaussian jitter.
PointCloud generate_shape(const SyntheticShapeSpec& spec);

} // namespace tinet
