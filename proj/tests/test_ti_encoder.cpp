// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "tinet/graph.hpp"
#include "tinet/pointcloud.hpp"
#include "tinet/rng.hpp"
#include "tinet/ti_encoder.hpp"

#include <cmath>

using namespace tinet;

namespace {

Matrix random_cloud(Rng& rng, int n) {
  Matrix x(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.next_gaussian();
  }
  return x;
}

Laplacian rw_of(const Matrix& points, int k) {
  return laplacian(build_knn_graph(points, k), LaplacianKind::RandomWalk);
}

Matrix center_rows(const Matrix& p) {
  return p.rowwise() - p.colwise().mean();
}

Matrix3 so3(Rng& rng) { return random_rotation(rng, RotationMode::UniformSo3).rotation; }

// Dense reference: row squared norms of L^i X with explicit matrix powers.
Matrix dense_iterated_sq_norms(const Matrix& l_dense, const Matrix& x, int order,
                               bool include_order0) {
  const int extra = include_order0 ? 1 : 0;
  Matrix out(x.rows(), order + extra);
  if (include_order0) out.col(0) = x.rowwise().squaredNorm();
  Matrix t = x;
  for (int i = 1; i <= order; ++i) {
    t = l_dense * t;
    out.col(i - 1 + extra) = t.rowwise().squaredNorm();
  }
  return out;
}

void check_close_rel(const Matrix& a, const Matrix& b, double tol) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      const double denom = std::max(1.0, std::abs(b(i, j)));
      CHECK(std::abs(a(i, j) - b(i, j)) <= tol * denom);
    }
  }
}

} // namespace

TEST_CASE("contour variance on the two-point cloud") {
  Matrix pts(2, 3);
  pts << 1, 0, 0, -1, 0, 0;
  const Laplacian l = rw_of(pts, 1);

  // L x swaps sign of the gap: rows (2,0,0) and (-2,0,0).
  const Matrix c1 = contour_variance(l, pts, 1);
  REQUIRE(c1.rows() == 2);
  REQUIRE(c1.cols() == 1);
  CHECK(c1(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c1(1, 0) == doctest::Approx(4.0).epsilon(1e-12));

  const Matrix c2 = contour_variance(l, pts, 2);
  REQUIRE(c2.cols() == 2);
  CHECK(c2(0, 1) == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(c2(1, 1) == doctest::Approx(16.0).epsilon(1e-12));

  // Order-0 column prepends the plain row squared norms.
  const Matrix c0 = contour_variance(l, pts, 2, true);
  REQUIRE(c0.cols() == 3);
  CHECK(c0(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c0(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c0(0, 1) == c1(0, 0));
  CHECK(c0(0, 2) == c2(0, 1));
}

TEST_CASE("contour variance rejects non-positive order and bad shapes") {
  Matrix pts(2, 3);
  pts << 1, 0, 0, -1, 0, 0;
  const Laplacian l = rw_of(pts, 1);
  CHECK_THROWS_AS(contour_variance(l, pts, 0), std::invalid_argument);
  Matrix wrong(3, 3);
  wrong.setZero();
  CHECK_THROWS_AS(contour_variance(l, wrong, 1), std::invalid_argument);
}

TEST_CASE("constant signal has zero contour response") {
  Rng rng(11);
  const Matrix pts = random_cloud(rng, 20);
  const Laplacian l = rw_of(pts, 4);
  Matrix sig(20, 3);
  for (int i = 0; i < 20; ++i) sig.row(i) << 0.3, -1.5, 2.0;
  // Row sums of L_rw vanish up to rounding in w/d, so the squared norms
  // land at ulp^2 scale rather than exact zero.
  const Matrix c = contour_variance(l, sig, 3);
  CHECK(c.cwiseAbs().maxCoeff() <= 1e-24);
  const Matrix c0 = contour_variance(l, sig, 2, true);
  const double sq = 0.3 * 0.3 + 1.5 * 1.5 + 2.0 * 2.0;
  CHECK(c0(5, 0) == doctest::Approx(sq).epsilon(1e-15));
}

TEST_CASE("direction signal on the two-point cloud") {
  Matrix pts(2, 3);
  pts << 1, 0, 0, -1, 0, 0;
  const Laplacian l = rw_of(pts, 1);
  const Matrix n = direction_signal(l, pts);
  CHECK(n(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n(0, 1) == 0.0);
  CHECK(n(1, 0) == doctest::Approx(-1.0).epsilon(1e-15));

  const Matrix dv = direction_variance(l, n, 1);
  CHECK(dv(0, 0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(dv(1, 0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("direction rows are unit or exactly zero") {
  SUBCASE("midpoint of a symmetric pair has no preferred direction") {
    Matrix pts(3, 3);
    pts << 0, 0, 0, 1, 0, 0, 2, 0, 0;
    const Laplacian l = rw_of(pts, 2);
    const Matrix n = direction_signal(l, pts);
    // Point 1 sees equal weights to both sides; T_1 cancels exactly.
    CHECK(n.row(1).norm() == 0.0);
    CHECK(n.row(0).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.row(2).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("generic cloud: every row unit") {
    Rng rng(5);
    const Matrix pts = random_cloud(rng, 40);
    const Laplacian l = rw_of(pts, 6);
    const Matrix n = direction_signal(l, pts);
    for (long i = 0; i < n.rows(); ++i) {
      CHECK(n.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("iterated filters match a dense-power oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 6 + static_cast<int>(rng.next_below(11)); // 6..16
    const int k = 2 + static_cast<int>(rng.next_below(3));  // 2..4
    const Matrix pts = random_cloud(rng, n);
    const Laplacian l = rw_of(pts, k);
    const Matrix l_dense = l.m.to_dense();
    const bool incl0 = (trial % 2) == 0;

    const Matrix got = contour_variance(l, pts, 3, incl0);
    const Matrix want = dense_iterated_sq_norms(l_dense, pts, 3, incl0);
    check_close_rel(got, want, 1e-10);

    const Matrix ndir = direction_signal(l, pts);
    const Matrix gd = direction_variance(l, ndir, 3, incl0);
    const Matrix wd = dense_iterated_sq_norms(l_dense, ndir, 3, incl0);
    check_close_rel(gd, wd, 1e-10);
  }
}

TEST_CASE("raw features are invariant under rigid motions and reflection") {
  Rng rng(123);
  const Matrix pts = random_cloud(rng, 60);
  const Laplacian l = rw_of(pts, 8);
  const TiRawFeatures base = ti_raw_features(l, center_rows(pts), 4, true);

  Rng trng(321);
  for (int trial = 0; trial < 4; ++trial) {
    const Matrix3 r = so3(trng);
    Vector t(3);
    t << trng.next_gaussian(), trng.next_gaussian(), trng.next_gaussian();
    Matrix moved = pts * r;
    moved.rowwise() += t.transpose();
    if (trial == 3) moved.col(0) *= -1.0; // improper transform
    const Laplacian lm = rw_of(moved, 8);
    const TiRawFeatures got = ti_raw_features(lm, center_rows(moved), 4, true);
    check_close_rel(got.contour, base.contour, 1e-9);
    check_close_rel(got.direction, base.direction, 1e-9);
    // ndir itself is equivariant, not invariant; its row norms agree.
    for (long i = 0; i < got.ndir.rows(); ++i) {
      CHECK(std::abs(got.ndir.row(i).norm() - base.ndir.row(i).norm()) <= 1e-9);
    }
  }
}

TEST_CASE("direction signal is rotation-equivariant") {
  Rng rng(9);
  const Matrix pts = random_cloud(rng, 30);
  const Laplacian l = rw_of(pts, 5);
  const Matrix n = direction_signal(l, pts);

  Rng trng(10);
  const Matrix3 r = so3(trng);
  const Matrix moved = pts * r;
  const Laplacian lm = rw_of(moved, 5);
  const Matrix nm = direction_signal(lm, moved);
  check_close_rel(nm, n * r, 1e-9);
}

TEST_CASE("scaling the cloud scales contour by s^2 per filter step, direction unchanged") {
  Rng rng(31);
  const Matrix pts = random_cloud(rng, 25);
  const Laplacian l = rw_of(pts, 4); // held fixed; only the signal scales
  const Matrix c = contour_variance(l, pts, 3);
  const Matrix c_scaled = contour_variance(l, (2.0 * pts).eval(), 3);
  // Power-of-two scaling commutes with every rounding step: bitwise equality.
  for (long i = 0; i < c.rows(); ++i) {
    for (long j = 0; j < c.cols(); ++j) {
      CHECK(c_scaled(i, j) == 4.0 * c(i, j));
    }
  }
  const Matrix n = direction_signal(l, pts);
  const Matrix n_scaled = direction_signal(l, (2.0 * pts).eval());
  CHECK((n_scaled - n).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ti_concat lays out contour then direction") {
  TiRawFeatures raw;
  raw.contour = Matrix(2, 2);
  raw.contour << 1, 2, 3, 4;
  raw.direction = Matrix(2, 2);
  raw.direction << 5, 6, 7, 8;
  raw.ndir = Matrix::Zero(2, 3);
  CHECK(raw.channels() == 4);
  const Matrix cat = ti_concat(raw);
  REQUIRE(cat.rows() == 2);
  REQUIRE(cat.cols() == 4);
  CHECK(cat(0, 0) == 1.0);
  CHECK(cat(0, 1) == 2.0);
  CHECK(cat(0, 2) == 5.0);
  CHECK(cat(0, 3) == 6.0);
  CHECK(cat(1, 2) == 7.0);
}

TEST_CASE("ti layer forward: selector and pure-bias examples") {
  Matrix raw(2, 4);
  raw << 4, 16, 4, 16, 4, 16, 4, 16;

  TiLayerParams sel;
  sel.theta = Matrix::Zero(4, 1);
  sel.theta(0, 0) = 1.0; // picks the first contour channel
  sel.bias = Matrix::Zero(1, 1);
  const Matrix out = ti_layer_forward(raw, sel);
  CHECK(out(0, 0) == 4.0);
  CHECK(out(1, 0) == 4.0);

  TiLayerParams pb;
  pb.theta = Matrix::Zero(4, 2);
  pb.bias = Matrix(1, 2);
  pb.bias << 0.5, -2.0;
  const Matrix ob = ti_layer_forward(raw, pb);
  CHECK(ob(0, 0) == 0.5);
  CHECK(ob(1, 1) == -2.0);

  TiLayerParams bad;
  bad.theta = Matrix::Zero(3, 1);
  bad.bias = Matrix::Zero(1, 1);
  CHECK_THROWS_AS(ti_layer_forward(raw, bad), std::invalid_argument);
}

TEST_CASE("ti layer backward matches finite differences") {
  Rng rng(2026);
  Matrix raw(5, 6);
  for (long i = 0; i < raw.size(); ++i) raw.data()[i] = rng.next_gaussian();
  TiLayerParams p;
  p.theta = Matrix(6, 3);
  for (long i = 0; i < p.theta.size(); ++i) p.theta.data()[i] = rng.next_gaussian();
  p.bias = Matrix(1, 3);
  for (long i = 0; i < p.bias.size(); ++i) p.bias.data()[i] = rng.next_gaussian();
  Matrix g(5, 3);
  for (long i = 0; i < g.size(); ++i) g.data()[i] = rng.next_gaussian();

  // loss = sum(out .* g); upstream gradient is g itself.
  Matrix dtheta, dbias;
  ti_layer_backward(raw, g, dtheta, dbias);
  REQUIRE(dtheta.rows() == 6);
  REQUIRE(dtheta.cols() == 3);
  REQUIRE(dbias.rows() == 1);
  REQUIRE(dbias.cols() == 3);

  const double h = 1e-6;
  auto loss = [&](const TiLayerParams& q) {
    return (ti_layer_forward(raw, q).array() * g.array()).sum();
  };
  for (long i = 0; i < p.theta.size(); ++i) {
    TiLayerParams hi = p, lo = p;
    hi.theta.data()[i] += h;
    lo.theta.data()[i] -= h;
    const double fd = (loss(hi) - loss(lo)) / (2 * h);
    CHECK(std::abs(dtheta.data()[i] - fd) <=
          1e-6 * std::max(1.0, std::abs(fd)));
  }
  for (long i = 0; i < p.bias.size(); ++i) {
    TiLayerParams hi = p, lo = p;
    hi.bias.data()[i] += h;
    lo.bias.data()[i] -= h;
    const double fd = (loss(hi) - loss(lo)) / (2 * h);
    CHECK(std::abs(dbias.data()[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }

  // Zero upstream: both gradients vanish identically.
  Matrix z0 = Matrix::Zero(5, 3), dt0, db0;
  ti_layer_backward(raw, z0, dt0, db0);
  CHECK(dt0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(db0.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(ti_layer_backward(raw, Matrix::Zero(4, 3), dt0, db0),
                  std::invalid_argument);
}

TEST_CASE("ti layer output composed with raw features is rigid-motion invariant") {
  Rng rng(55);
  const Matrix pts = random_cloud(rng, 48);
  TiLayerParams p;
  p.theta = Matrix(8, 4);
  for (long i = 0; i < p.theta.size(); ++i) p.theta.data()[i] = rng.next_gaussian();
  p.bias = Matrix(1, 4);
  for (long i = 0; i < p.bias.size(); ++i) p.bias.data()[i] = rng.next_gaussian();

  const Laplacian l = rw_of(pts, 6);
  const Matrix base =
      ti_layer_forward(ti_concat(ti_raw_features(l, center_rows(pts), 4)), p);

  Rng trng(56);
  const Matrix3 r = so3(trng);
  Matrix moved = pts * r;
  moved.rowwise() += Eigen::RowVector3d(0.4, -1.9, 2.5);
  const Laplacian lm = rw_of(moved, 6);
  const Matrix got = ti_layer_forward(
      ti_concat(ti_raw_features(lm, center_rows(moved), 4)), p);
  check_close_rel(got, base, 1e-9);
}
