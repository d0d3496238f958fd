// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "tinet/rng.hpp"
#include "tinet/types.hpp"

namespace tinet {

/// N points with 3 coordinates each, plus optional per-point attribute
/// channels. Clouds are immutable values: every operation returns a copy.
struct PointCloud {
  Matrix points;     // N x 3
  Matrix attributes; // N x C, zero columns when absent
  int label = -1;

  int n() const { return static_cast<int>(points.rows()); }
};

struct RigidTransform {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();
};

enum class RotationMode { AzimuthalZ, UniformSo3 };

/// Subtracts the centroid. Pairwise distances are untouched.
PointCloud recenter(const PointCloud& cloud);

/// Recenters, then scales so the farthest point sits on the unit sphere.
/// Throws DataError for clouds with zero spread.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

/// AzimuthalZ: rotation about z with angle uniform in [0, 2*pi).
/// UniformSo3: Haar-uniform via a normalized 4-normal quaternion.
/// Translation is zero; callers add one explicitly when wanted.
RigidTransform random_rotation(Rng& rng, RotationMode mode);

/// random_rotation plus a translation with i.i.d. N(0, scale^2) components.
RigidTransform random_transform(Rng& rng, RotationMode mode, double translation_scale);

/// p -> R p + t per point; attributes and label carried through.
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

/// Adds i.i.d. zero-mean Gaussian noise of std dev sigma per coordinate.
PointCloud jitter(const PointCloud& cloud, double sigma, Rng& rng);
PointCloud jitter(const PointCloud& cloud, double sigma, std::uint64_t seed);

/// Pairwise Euclidean distance matrix (dense, test/debug helper).
Matrix pairwise_distances(const Matrix& points);

} // namespace tinet
