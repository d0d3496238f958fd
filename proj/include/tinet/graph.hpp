// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "tinet/types.hpp"

namespace tinet {

/// Exact k-nearest-neighbour table. Rows sorted by ascending squared
/// distance, ties broken by ascending point index; a point is never its
/// own neighbour.
struct KnnResult {
  IMatrix neighbors; // N x k
  Matrix sq_dists;   // N x k, E_{i,j} = ||x_i - x_j||^2
  int k() const { return static_cast<int>(neighbors.cols()); }
};

/// Minimal CSR container; column indices sorted within each row.
struct SparseCsr {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_ptr; // size n_rows + 1
  std::vector<int> col;
  std::vector<double> val;

  int nnz() const { return static_cast<int>(col.size()); }
  Matrix to_dense() const;
};

/// Symmetric weighted kNN adjacency plus its degree vector and the
/// self-adaptive kernel width used to build it.
struct SparseGraph {
  int n = 0;
  SparseCsr w;   // symmetric, no diagonal, weights in (0, 1]
  Vector degree; // row sums of w
  double sigma = 0.0;
};

enum class LaplacianKind { RandomWalk, SymmetricNormalized };

struct Laplacian {
  LaplacianKind kind = LaplacianKind::RandomWalk;
  SparseCsr m; // same sparsity as W plus unit diagonal
};

/// Exact brute-force kNN by squared Euclidean distance (any dimension).
/// Requires 1 <= k <= N-1.
KnnResult knn(const Matrix& points_or_features, int k);

/// Gaussian edge weights w = exp(-E / sigma^2) on the kNN edges, with
/// sigma = mean over points of the row-max squared neighbour distance,
/// then symmetrized by entrywise max. Throws DataError when sigma == 0.
SparseGraph build_graph(const KnnResult& nn);

/// knn + build_graph in one step (dynamic graph updates rebuild in either
/// coordinate or feature space; the caller picks the rows it passes).
SparseGraph build_knn_graph(const Matrix& rows, int k);

/// RandomWalk: I - D^-1 W. SymmetricNormalized: I - D^-1/2 W D^-1/2.
Laplacian laplacian(const SparseGraph& g, LaplacianKind kind);

/// Sparse L * X.
Matrix shift_apply(const Laplacian& l, const Matrix& x);
Matrix csr_apply(const SparseCsr& m, const Matrix& x);

/// Debug dump: "i j w" per edge, sorted by (i, j), 17 significant digits.
void dump_edges(const SparseGraph& g, std::ostream& out);

} // namespace tinet
