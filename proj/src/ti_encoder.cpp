// SPDX-License-Identifier: Apache-2.0
#include "tinet/ti_encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace tinet {

namespace {

constexpr double kZeroDirectionEps = 1e-12;

Matrix iterated_row_sq_norms(const Laplacian& l, const Matrix& signal, int order,
                             bool include_order0) {
  if (order < 1) throw std::invalid_argument("filter order must be >= 1");
  if (signal.rows() != l.m.n_rows) {
    throw std::invalid_argument("signal rows do not match graph size");
  }
  const int extra = include_order0 ? 1 : 0;
  Matrix out(signal.rows(), order + extra);
  if (include_order0) {
    out.col(0) = signal.rowwise().squaredNorm();
  }
  Matrix t = signal;
  for (int i = 1; i <= order; ++i) {
    t = shift_apply(l, t); // never densifies L^i
    out.col(i - 1 + extra) = t.rowwise().squaredNorm();
  }
  return out;
}

} // namespace

Matrix contour_variance(const Laplacian& l_rw, const Matrix& x, int order,
                        bool include_order0) {
  return iterated_row_sq_norms(l_rw, x, order, include_order0);
}

Matrix direction_signal(const Laplacian& l_rw, const Matrix& x) {
  Matrix t = shift_apply(l_rw, x);
  for (long i = 0; i < t.rows(); ++i) {
    const double norm = t.row(i).norm();
    if (norm > kZeroDirectionEps) {
      t.row(i) /= norm;
    } else {
      t.row(i).setZero(); // symmetric neighbourhood: no preferred direction
    }
  }
  return t;
}

Matrix direction_variance(const Laplacian& l_rw, const Matrix& ndir, int order,
                          bool include_order0) {
  return iterated_row_sq_norms(l_rw, ndir, order, include_order0);
}

TiRawFeatures ti_raw_features(const Laplacian& l_rw, const Matrix& x, int order,
                              bool include_order0) {
  TiRawFeatures raw;
  raw.contour = contour_variance(l_rw, x, order, include_order0);
  raw.ndir = direction_signal(l_rw, x);
  raw.direction = direction_variance(l_rw, raw.ndir, order, include_order0);
  return raw;
}

Matrix ti_concat(const TiRawFeatures& raw) {
  Matrix out(raw.contour.rows(), raw.contour.cols() + raw.direction.cols());
  out << raw.contour, raw.direction;
  return out;
}

Matrix ti_layer_forward(const Matrix& raw_concat, const TiLayerParams& params) {
  if (raw_concat.cols() != params.theta.rows()) {
    throw std::invalid_argument("ti_layer_forward: channel count mismatch");
  }
  Matrix out = raw_concat * params.theta;
  out.rowwise() += params.bias.row(0);
  return out;
}

void ti_layer_backward(const Matrix& raw_concat, const Matrix& upstream,
                       Matrix& dtheta, Matrix& dbias) {
  if (raw_concat.rows() != upstream.rows()) {
    throw std::invalid_argument("ti_layer_backward: row count mismatch");
  }
  dtheta = raw_concat.transpose() * upstream;
  dbias = upstream.colwise().sum();
}

} // namespace tinet
