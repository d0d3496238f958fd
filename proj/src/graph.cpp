// SPDX-License-Identifier: Apache-2.0
#include "tinet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "tinet/errors.hpp"
#include "tinet/util.hpp"

namespace tinet {

Matrix SparseCsr::to_dense() const {
  Matrix d = Matrix::Zero(n_rows, n_cols);
  for (int i = 0; i < n_rows; ++i) {
    for (int e = row_ptr[i]; e < row_ptr[i + 1]; ++e) {
      d(i, col[e]) = val[e];
    }
  }
  return d;
}

KnnResult knn(const Matrix& points, int k) {
  const int n = static_cast<int>(points.rows());
  if (points.cols() < 1) throw std::invalid_argument("knn: need at least one column");
  if (k < 1 || k > n - 1) {
    throw std::invalid_argument("knn: k must satisfy 1 <= k <= N-1");
  }
  KnnResult out;
  out.neighbors.resize(n, k);
  out.sq_dists.resize(n, k);

  parallel_for(n, [&](int i) {
    // (squared distance, index) pairs; lexicographic order gives the
    // ascending-index tie-break.
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((points.row(i) - points.row(j)).squaredNorm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    for (int c = 0; c < k; ++c) {
      out.sq_dists(i, c) = cand[c].first;
      out.neighbors(i, c) = cand[c].second;
    }
  });
  return out;
}

SparseGraph build_graph(const KnnResult& nn) {
  const int n = static_cast<int>(nn.neighbors.rows());
  const int k = nn.k();

  double sigma = 0.0;
  for (int i = 0; i < n; ++i) {
    sigma += nn.sq_dists(i, k - 1); // rows sorted ascending: last is the max
  }
  sigma /= n;
  if (sigma == 0.0) {
    throw DataError("build_graph: sigma is zero (all points coincident)");
  }

  // Directed kNN weights, then entrywise-max symmetrization. Collecting
  // both orientations and keeping the max per (i, j) does exactly that.
  struct Edge {
    int i, j;
    double w;
  };
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * k * 2);
  const double inv_sigma_sq = 1.0 / (sigma * sigma);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) {
      const int j = nn.neighbors(i, c);
      const double w = std::exp(-nn.sq_dists(i, c) * inv_sigma_sq);
      edges.push_back({i, j, w});
      edges.push_back({j, i, w});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  SparseGraph g;
  g.n = n;
  g.sigma = sigma;
  g.w.n_rows = g.w.n_cols = n;
  g.w.row_ptr.assign(n + 1, 0);
  g.w.col.reserve(edges.size());
  g.w.val.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size();) {
    std::size_t f = e;
    double w = edges[e].w;
    while (f + 1 < edges.size() && edges[f + 1].i == edges[e].i && edges[f + 1].j == edges[e].j) {
      ++f;
      w = std::max(w, edges[f].w);
    }
    g.w.col.push_back(edges[e].j);
    g.w.val.push_back(w);
    ++g.w.row_ptr[edges[e].i + 1];
    e = f + 1;
  }
  for (int i = 0; i < n; ++i) g.w.row_ptr[i + 1] += g.w.row_ptr[i];

  g.degree.resize(n);
  for (int i = 0; i < n; ++i) {
    double d = 0.0;
    for (int e = g.w.row_ptr[i]; e < g.w.row_ptr[i + 1]; ++e) d += g.w.val[e];
    g.degree[i] = d;
  }
  return g;
}

SparseGraph build_knn_graph(const Matrix& rows, int k) {
  return build_graph(knn(rows, k));
}

Laplacian laplacian(const SparseGraph& g, LaplacianKind kind) {
  for (int i = 0; i < g.n; ++i) {
    if (!(g.degree[i] > 0.0)) {
      throw NumericError("laplacian: zero-degree node " + std::to_string(i));
    }
  }
  Laplacian l;
  l.kind = kind;
  l.m.n_rows = l.m.n_cols = g.n;
  l.m.row_ptr.assign(g.n + 1, 0);
  l.m.col.reserve(g.w.col.size() + g.n);
  l.m.val.reserve(g.w.col.size() + g.n);

  Vector inv_sqrt_deg;
  if (kind == LaplacianKind::SymmetricNormalized) {
    inv_sqrt_deg = g.degree.array().sqrt().inverse();
  }
  for (int i = 0; i < g.n; ++i) {
    bool diag_done = false;
    auto push_diag = [&] {
      l.m.col.push_back(i);
      l.m.val.push_back(1.0);
      diag_done = true;
    };
    for (int e = g.w.row_ptr[i]; e < g.w.row_ptr[i + 1]; ++e) {
      const int j = g.w.col[e];
      if (!diag_done && j > i) push_diag();
      const double w = g.w.val[e];
      l.m.col.push_back(j);
      l.m.val.push_back(kind == LaplacianKind::RandomWalk
                            ? -w / g.degree[i]
                            : -w * inv_sqrt_deg[i] * inv_sqrt_deg[j]);
    }
    if (!diag_done) push_diag();
    l.m.row_ptr[i + 1] = static_cast<int>(l.m.col.size());
  }
  return l;
}

Matrix csr_apply(const SparseCsr& m, const Matrix& x) {
  if (x.rows() != m.n_cols) {
    throw std::invalid_argument("csr_apply: row count mismatch");
  }
  Matrix out = Matrix::Zero(m.n_rows, x.cols());
  for (int i = 0; i < m.n_rows; ++i) {
    auto row = out.row(i);
    for (int e = m.row_ptr[i]; e < m.row_ptr[i + 1]; ++e) {
      row += m.val[e] * x.row(m.col[e]);
    }
  }
  return out;
}

Matrix shift_apply(const Laplacian& l, const Matrix& x) {
  return csr_apply(l.m, x);
}

void dump_edges(const SparseGraph& g, std::ostream& out) {
  for (int i = 0; i < g.n; ++i) {
    for (int e = g.w.row_ptr[i]; e < g.w.row_ptr[i + 1]; ++e) {
      out << i << ' ' << g.w.col[e] << ' ' << fmt_g17(g.w.val[e]) << '\n';
    }
  }
}

} // namespace tinet
