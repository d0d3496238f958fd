// SPDX-License-Identifier: Apache-2.0
#include "tinet/cheb_gcn.hpp"

#include <cmath>
#include <stdexcept>

#include "tinet/errors.hpp"
#include "tinet/rng.hpp"

namespace tinet {

ScaledLaplacian scale_laplacian(const Laplacian& l_sym) {
  if (l_sym.kind != LaplacianKind::SymmetricNormalized) {
    throw std::invalid_argument("scale_laplacian: expected symmetric normalized Laplacian");
  }
  // L~ = L - I: drop the unit diagonal, keep off-diagonal entries.
  ScaledLaplacian lt;
  lt.m.n_rows = l_sym.m.n_rows;
  lt.m.n_cols = l_sym.m.n_cols;
  lt.m.row_ptr.assign(l_sym.m.n_rows + 1, 0);
  for (int i = 0; i < l_sym.m.n_rows; ++i) {
    for (int e = l_sym.m.row_ptr[i]; e < l_sym.m.row_ptr[i + 1]; ++e) {
      if (l_sym.m.col[e] == i) continue;
      lt.m.col.push_back(l_sym.m.col[e]);
      lt.m.val.push_back(l_sym.m.val[e]);
    }
    lt.m.row_ptr[i + 1] = static_cast<int>(lt.m.col.size());
  }
  return lt;
}

std::vector<Matrix> cheb_basis(const ScaledLaplacian& lt, const Matrix& x, int k_cheb) {
  if (k_cheb < 1) throw std::invalid_argument("cheb_basis: k_cheb must be >= 1");
  if (x.rows() != lt.m.n_rows) {
    throw std::invalid_argument("cheb_basis: signal rows do not match graph size");
  }
  std::vector<Matrix> basis;
  basis.reserve(k_cheb);
  basis.push_back(x);
  if (k_cheb > 1) basis.push_back(csr_apply(lt.m, x));
  for (int k = 2; k < k_cheb; ++k) {
    basis.push_back(2.0 * csr_apply(lt.m, basis[k - 1]) - basis[k - 2]);
  }
  return basis;
}

Matrix cheb_forward(const ScaledLaplacian& lt, const Matrix& x,
                    const ChebLayerParams& params, ChebCache* cache) {
  if (params.weights.empty()) throw std::invalid_argument("cheb_forward: no weights");
  if (x.cols() != params.f_in()) {
    throw std::invalid_argument("cheb_forward: input feature count mismatch");
  }
  if (!params.scalar_theta &&
      static_cast<int>(params.weights.size()) != params.k_cheb) {
    throw std::invalid_argument("cheb_forward: weight count != k_cheb");
  }

  const std::vector<Matrix> basis = cheb_basis(lt, x, params.k_cheb);
  Matrix preact;
  Matrix combined;
  if (params.scalar_theta) {
    combined = params.theta(0, 0) * basis[0];
    for (int k = 1; k < params.k_cheb; ++k) combined += params.theta(0, k) * basis[k];
    preact = combined * params.weights[0];
  } else {
    preact = basis[0] * params.weights[0];
    for (int k = 1; k < params.k_cheb; ++k) preact += basis[k] * params.weights[k];
  }
  preact.rowwise() += params.bias.row(0);

  if (!preact.allFinite()) {
    throw NumericError("cheb_forward: non-finite output (exploding weights?)");
  }

  Matrix y = params.act == Activation::Relu ? preact.cwiseMax(0.0).eval() : preact;
  if (cache) {
    cache->basis = basis;
    cache->combined = std::move(combined);
    cache->preact = std::move(preact);
  }
  return y;
}

ChebGrads cheb_backward(const ScaledLaplacian& lt, const ChebLayerParams& params,
                        const ChebCache& cache, const Matrix& upstream) {
  if (cache.basis.empty()) throw std::invalid_argument("cheb_backward: missing cache");
  const int k_cheb = params.k_cheb;

  // Mask upstream by the activation derivative (relu'(0) := 0).
  Matrix u = upstream;
  if (params.act == Activation::Relu) {
    u = u.cwiseProduct((cache.preact.array() > 0.0).cast<double>().matrix());
  }

  ChebGrads grads;
  grads.bias = u.colwise().sum();

  // g[k]: gradient w.r.t. basis matrix B_k.
  std::vector<Matrix> g(k_cheb);
  if (params.scalar_theta) {
    const Matrix gw_shared = u * params.weights[0].transpose();
    grads.weights.resize(1);
    grads.weights[0] = cache.combined.transpose() * u;
    grads.theta.resize(1, k_cheb);
    for (int k = 0; k < k_cheb; ++k) {
      grads.theta(0, k) = cache.basis[k].cwiseProduct(gw_shared).sum();
      g[k] = params.theta(0, k) * gw_shared;
    }
  } else {
    grads.weights.resize(k_cheb);
    for (int k = 0; k < k_cheb; ++k) {
      grads.weights[k] = cache.basis[k].transpose() * u;
      g[k] = u * params.weights[k].transpose();
    }
  }

  // Reverse the recurrence B_k = 2 L~ B_{k-1} - B_{k-2} (L~ is symmetric,
  // so the transpose applies are plain applies).
  for (int k = k_cheb - 1; k >= 2; --k) {
    g[k - 1] += 2.0 * csr_apply(lt.m, g[k]);
    g[k - 2] -= g[k];
  }
  grads.input = g[0];
  if (k_cheb > 1) grads.input += csr_apply(lt.m, g[1]);
  return grads;
}

ChebLayerParams cheb_layer_init(int f_in, int f_out, int k_cheb, Activation act,
                                bool scalar_theta, Rng& rng) {
  ChebLayerParams p;
  p.k_cheb = k_cheb;
  p.scalar_theta = scalar_theta;
  p.act = act;
  const double bound = std::sqrt(6.0 / (static_cast<double>(f_in) * k_cheb + f_out));
  auto uniform = [&](long rows, long cols, double b) {
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) m(i, j) = b * (2.0 * rng.next_double() - 1.0);
    }
    return m;
  };
  if (scalar_theta) {
    p.weights.push_back(uniform(f_in, f_out, std::sqrt(6.0 / (f_in + f_out))));
    p.theta = uniform(1, k_cheb, 1.0 / std::sqrt(static_cast<double>(k_cheb)));
  } else {
    for (int k = 0; k < k_cheb; ++k) p.weights.push_back(uniform(f_in, f_out, bound));
  }
  p.bias = Matrix::Zero(1, f_out);
  return p;
}

} // namespace tinet
