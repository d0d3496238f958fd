// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "tinet/errors.hpp"
#include "tinet/pointcloud.hpp"

using namespace tinet;

namespace {

PointCloud make_cloud(std::initializer_list<std::initializer_list<double>> rows) {
  PointCloud c;
  c.points = Matrix(static_cast<long>(rows.size()), 3);
  long r = 0;
  for (const auto& row : rows) {
    long i = 0;
    for (double v : row) c.points(r, i++) = v;
    ++r;
  }
  c.attributes = Matrix(c.points.rows(), 0);
  return c;
}

PointCloud random_cloud(int n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c;
  c.points = Matrix(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) c.points(i, j) = rng.next_gaussian();
  c.attributes = Matrix(n, 0);
  return c;
}

} // namespace

TEST_CASE("recenter subtracts the centroid") {
  const PointCloud c = make_cloud({{0, 0, 0}, {2, 0, 0}});
  const PointCloud r = recenter(c);
  CHECK(r.points(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(r.points(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.points.col(1).cwiseAbs().maxCoeff() == 0.0);

  const PointCloud again = recenter(r);
  CHECK((again.points - r.points).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("recenter leaves pairwise distances unchanged") {
  const PointCloud c = random_cloud(40, 3);
  const Matrix before = pairwise_distances(c.points);
  const Matrix after = pairwise_distances(recenter(c).points);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_unit_sphere recenters and scales max norm to 1") {
  const PointCloud c = make_cloud({{-2, 0, 0}, {2, 0, 0}});
  const PointCloud n = normalize_unit_sphere(c);
  CHECK(n.points(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(n.points(1, 0) == doctest::Approx(1.0).epsilon(1e-15));

  const PointCloud unit = make_cloud({{-1, 0, 0}, {1, 0, 0}});
  const PointCloud same = normalize_unit_sphere(unit);
  CHECK((same.points - unit.points).cwiseAbs().maxCoeff() < 1e-12);

  const PointCloud rand = random_cloud(64, 9);
  const PointCloud norm = normalize_unit_sphere(rand);
  CHECK(norm.points.rowwise().norm().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm.points.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  const PointCloud twice = normalize_unit_sphere(norm);
  CHECK((twice.points - norm.points).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize_unit_sphere rejects zero-spread clouds") {
  const PointCloud degenerate = make_cloud({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  CHECK_THROWS_AS(normalize_unit_sphere(degenerate), DataError);
}

TEST_CASE("random rotations are orthogonal with determinant +1") {
  Rng rng(17);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform t =
        random_rotation(rng, i % 2 == 0 ? RotationMode::AzimuthalZ : RotationMode::UniformSo3);
    const Matrix3 should_be_i = t.rotation.transpose() * t.rotation;
    CHECK((should_be_i - Matrix3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(t.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.translation.norm() == 0.0);
  }
}

TEST_CASE("azimuthal rotations fix the z axis") {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const RigidTransform t = random_rotation(rng, RotationMode::AzimuthalZ);
    const Vector3 z(0, 0, 1);
    CHECK(((t.rotation * z) - z).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("uniform_so3 entry mean vanishes over many samples") {
  // Haar-uniform rotations have zero mean in every matrix entry; checked
  // by Monte-Carlo with 1e5 samples.
  Rng rng(1);
  const int n = 100000;
  double sum00 = 0.0;
  for (int i = 0; i < n; ++i) sum00 += random_rotation(rng, RotationMode::UniformSo3).rotation(0, 0);
  CHECK(std::abs(sum00 / n) < 0.02);
}

TEST_CASE("apply_transform is R p + t and preserves distances") {
  PointCloud c = make_cloud({{1, 0, 0}});
  RigidTransform t;
  t.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1; // 90 degrees about z
  PointCloud rotated = apply_transform(c, t);
  CHECK(rotated.points(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(rotated.points(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  const PointCloud cloud = random_cloud(32, 5);
  Rng rng(2);
  const RigidTransform rt = random_transform(rng, RotationMode::UniformSo3, 2.0);
  const PointCloud moved = apply_transform(cloud, rt);
  const Matrix before = pairwise_distances(cloud.points);
  const Matrix after = pairwise_distances(moved.points);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);

  RigidTransform id;
  const PointCloud same = apply_transform(cloud, id);
  CHECK((same.points - cloud.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jitter adds seeded gaussian noise of the requested scale") {
  const PointCloud c = random_cloud(10000, 8);
  const PointCloud same = jitter(c, 0.0, 123);
  CHECK((same.points - c.points).cwiseAbs().maxCoeff() == 0.0);

  const PointCloud a = jitter(c, 0.01, 123);
  const PointCloud b = jitter(c, 0.01, 123);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);

  const Matrix diff = a.points - c.points;
  const double sd = std::sqrt(diff.array().square().mean());
  CHECK(sd > 0.0095);
  CHECK(sd < 0.0105);

  CHECK_THROWS_AS(jitter(c, -0.1, 1), std::invalid_argument);
}
