// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tinet/graph.hpp"
#include "tinet/types.hpp"

namespace tinet {

/// Rotation/translation-invariant raw geometry features. Column i of
/// `contour` holds the per-row squared norm of (L_rw)^i X; `direction`
/// applies the same construction to the per-point unit direction signal.
/// With the order-0 flag the ||row||^2 of the unfiltered signal is
/// prepended as an extra column per branch.
struct TiRawFeatures {
  Matrix contour;   // N x K (or N x K+1 with order 0)
  Matrix direction; // same shape as contour
  Matrix ndir;      // N x 3 unit (or zero) direction vectors

  int channels() const {
    return static_cast<int>(contour.cols() + direction.cols());
  }
};

/// Per-row squared norms of the iterated filter outputs L x, L^2 x, ...
/// computed with sparse applies only. X should be recentered.
Matrix contour_variance(const Laplacian& l_rw, const Matrix& x, int order,
                        bool include_order0 = false);

/// Row-normalized T = L_rw X; rows with ||T_i|| <= 1e-12 become zero.
Matrix direction_signal(const Laplacian& l_rw, const Matrix& x);

Matrix direction_variance(const Laplacian& l_rw, const Matrix& ndir, int order,
                          bool include_order0 = false);

TiRawFeatures ti_raw_features(const Laplacian& l_rw, const Matrix& x, int order,
                              bool include_order0 = false);

/// [contour | direction] concatenation, the TI layer's input.
Matrix ti_concat(const TiRawFeatures& raw);

/// Trainable linear map from raw invariant channels to F0 feature maps.
struct TiLayerParams {
  Matrix theta; // channels x F0
  Matrix bias;  // 1 x F0
};

Matrix ti_layer_forward(const Matrix& raw_concat, const TiLayerParams& params);

/// d(loss)/d(theta) and d(loss)/d(bias) for an upstream gradient on the
/// layer output. The raw features carry no trainable inputs upstream.
void ti_layer_backward(const Matrix& raw_concat, const Matrix& upstream,
                       Matrix& dtheta, Matrix& dbias);

} // namespace tinet
