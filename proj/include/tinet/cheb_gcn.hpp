// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "tinet/graph.hpp"
#include "tinet/types.hpp"

namespace tinet {

/// L_sym - I: spectrum mapped from [0, 2] into [-1, 1] so the Chebyshev
/// recurrence stays bounded. Symmetric, zero diagonal.
struct ScaledLaplacian {
  SparseCsr m;
};

ScaledLaplacian scale_laplacian(const Laplacian& l_sym);

/// Chebyshev basis B_0 = X, B_1 = L~ X, B_k = 2 L~ B_{k-1} - B_{k-2},
/// via sparse applies only.
std::vector<Matrix> cheb_basis(const ScaledLaplacian& lt, const Matrix& x, int k_cheb);

enum class Activation { None, Relu };

/// K-localized graph convolution parameters. Two parameterizations:
///   per-order (default): weights[k] is an F_in x F_out matrix.
///   scalar theta: one shared F_in x F_out matrix in weights[0] plus
///   K scalar coefficients (the rank-constrained literal form).
struct ChebLayerParams {
  int k_cheb = 3;
  bool scalar_theta = false;
  std::vector<Matrix> weights;
  Matrix theta; // 1 x K, used only when scalar_theta
  Matrix bias;  // 1 x F_out
  Activation act = Activation::Relu;

  int f_in() const { return static_cast<int>(weights.at(0).rows()); }
  int f_out() const { return static_cast<int>(weights.at(0).cols()); }
};

struct ChebCache {
  std::vector<Matrix> basis;
  Matrix combined; // scalar-theta mode: sum_k theta_k B_k
  Matrix preact;
};

/// y = act( sum_k B_k Theta_k + bias ). Throws NumericError if the output
/// is non-finite.
Matrix cheb_forward(const ScaledLaplacian& lt, const Matrix& x,
                    const ChebLayerParams& params, ChebCache* cache = nullptr);

struct ChebGrads {
  std::vector<Matrix> weights;
  Matrix theta;
  Matrix bias;
  Matrix input; // d(loss)/dX
};

/// Analytic gradients; requires the forward cache. The input gradient is
/// back-propagated through the recurrence using the symmetry of L~.
ChebGrads cheb_backward(const ScaledLaplacian& lt, const ChebLayerParams& params,
                        const ChebCache& cache, const Matrix& upstream);

/// Glorot-style init with the K_cheb fan adjustment; bias zero.
ChebLayerParams cheb_layer_init(int f_in, int f_out, int k_cheb, Activation act,
                                bool scalar_theta, class Rng& rng);

} // namespace tinet
