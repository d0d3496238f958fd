// SPDX-License-Identifier: Apache-2.0
#include "tinet/pointcloud.hpp"

#include <cmath>
#include <stdexcept>

#include "tinet/errors.hpp"

namespace tinet {

PointCloud recenter(const PointCloud& cloud) {
  PointCloud out = cloud;
  const Eigen::RowVector3d centroid = cloud.points.colwise().mean();
  out.points.rowwise() -= centroid;
  return out;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  PointCloud out = recenter(cloud);
  const double max_norm = out.points.rowwise().norm().maxCoeff();
  if (max_norm == 0.0) {
    throw DataError("normalize_unit_sphere: degenerate cloud (zero spread)");
  }
  out.points /= max_norm;
  return out;
}

RigidTransform random_rotation(Rng& rng, RotationMode mode) {
  RigidTransform t;
  if (mode == RotationMode::AzimuthalZ) {
    const double angle = 2.0 * M_PI * rng.next_double();
    const double c = std::cos(angle), s = std::sin(angle);
    t.rotation << c, -s, 0.0,
                  s,  c, 0.0,
                  0.0, 0.0, 1.0;
    return t;
  }
  // Haar-uniform: 4 standard normals (draw order w, x, y, z), normalized
  // to a unit quaternion, converted to a rotation matrix.
  double w, x, y, z, n2;
  do {
    w = rng.next_gaussian();
    x = rng.next_gaussian();
    y = rng.next_gaussian();
    z = rng.next_gaussian();
    n2 = w * w + x * x + y * y + z * z;
  } while (n2 < 1e-12);
  const double inv = 1.0 / std::sqrt(n2);
  w *= inv; x *= inv; y *= inv; z *= inv;
  t.rotation << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
                2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
                2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y);
  return t;
}

RigidTransform random_transform(Rng& rng, RotationMode mode, double translation_scale) {
  RigidTransform t = random_rotation(rng, mode);
  for (int i = 0; i < 3; ++i) {
    t.translation[i] = translation_scale * rng.next_gaussian();
  }
  return t;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out = cloud;
  for (int i = 0; i < cloud.n(); ++i) {
    const Vector3 p = cloud.points.row(i).transpose();
    out.points.row(i) = (t.rotation * p + t.translation).transpose();
  }
  return out;
}

PointCloud jitter(const PointCloud& cloud, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("jitter: sigma must be >= 0");
  PointCloud out = cloud;
  if (sigma == 0.0) return out;
  for (int i = 0; i < cloud.n(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out.points(i, c) += sigma * rng.next_gaussian();
    }
  }
  return out;
}

PointCloud jitter(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  return jitter(cloud, sigma, rng);
}

Matrix pairwise_distances(const Matrix& points) {
  const int n = static_cast<int>(points.rows());
  Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
    }
  }
  return d;
}

} // namespace tinet
