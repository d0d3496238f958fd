// SPDX-License-Identifier: Apache-2.0
#include "tinet/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tinet {

Vector ti_score(const TiRawFeatures& raw, TiScoreMode mode) {
  if (raw.contour.cols() == 0) throw std::invalid_argument("ti_score: empty contour features");
  if (mode == TiScoreMode::FirstContour) return raw.contour.col(0);
  const long n = raw.contour.rows();
  Vector s(n);
  for (long i = 0; i < n; ++i) {
    double acc = raw.contour.row(i).squaredNorm() + raw.direction.row(i).squaredNorm();
    s(i) = std::sqrt(acc);
  }
  return s;
}

PoolingPlan coarsen(const Matrix& parent_points, const Vector& scores, int n_keep, int m) {
  const int n = static_cast<int>(parent_points.rows());
  if (scores.size() != n) throw std::invalid_argument("coarsen: scores/points size mismatch");
  if (n_keep < 1 || n_keep > n) throw std::invalid_argument("coarsen: n_keep out of range");
  if (m < 1 || m > n) throw std::invalid_argument("coarsen: m out of range");

  // Sort by descending score; equal scores keep the lower index first so
  // the selection is deterministic.
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });

  PoolingPlan plan;
  plan.kept.assign(order.begin(), order.begin() + n_keep);
  plan.m = m;
  plan.clusters = IMatrix(n_keep, m);

  // Each kept point pools over its m nearest parents, itself included.
  // m-NN here is over all parent points, matching the neighbourhood the
  // graph at the parent resolution saw.
  if (m == 1) {
    for (int r = 0; r < n_keep; ++r) plan.clusters(r, 0) = plan.kept[static_cast<size_t>(r)];
    return plan;
  }
  KnnResult nn = knn(parent_points, m - 1);
  for (int r = 0; r < n_keep; ++r) {
    const int c = plan.kept[static_cast<size_t>(r)];
    plan.clusters(r, 0) = c;
    for (int j = 0; j < m - 1; ++j) plan.clusters(r, j + 1) = nn.neighbors(c, j);
  }
  return plan;
}

PoolingPlan coarsen(const Matrix& parent_points, const TiRawFeatures& raw, int n_keep, int m) {
  return coarsen(parent_points, ti_score(raw), n_keep, m);
}

Matrix pool_features(const PoolingPlan& plan, const Matrix& x, IMatrix* argmax) {
  const int n_out = static_cast<int>(plan.kept.size());
  const long f = x.cols();
  Matrix out(n_out, f);
  if (argmax != nullptr) *argmax = IMatrix(n_out, f);
  for (int r = 0; r < n_out; ++r) {
    for (long c = 0; c < f; ++c) {
      double best = -std::numeric_limits<double>::infinity();
      int best_idx = -1;
      for (int j = 0; j < plan.m; ++j) {
        const int p = plan.clusters(r, j);
        if (p < 0 || p >= x.rows()) throw std::invalid_argument("pool_features: cluster index out of range");
        const double v = x(p, c);
        // Strict > with the smallest parent index scanned first inside the
        // cluster would not be globally lowest; compare indices on ties.
        if (v > best || (v == best && p < best_idx)) {
          best = v;
          best_idx = p;
        }
      }
      out(r, c) = best;
      if (argmax != nullptr) (*argmax)(r, c) = best_idx;
    }
  }
  return out;
}

Matrix pool_backward(const IMatrix& argmax, int parent_rows, const Matrix& upstream) {
  if (argmax.rows() != upstream.rows() || argmax.cols() != upstream.cols())
    throw std::invalid_argument("pool_backward: argmax/upstream shape mismatch");
  Matrix grad = Matrix::Zero(parent_rows, upstream.cols());
  for (long r = 0; r < upstream.rows(); ++r)
    for (long c = 0; c < upstream.cols(); ++c) grad(argmax(r, c), c) += upstream(r, c);
  return grad;
}

GraphSpace parse_graph_space(const std::string& name) {
  if (name == "coordinates") return GraphSpace::Coordinates;
  if (name == "features") return GraphSpace::Features;
  throw std::invalid_argument("unknown graph space: " + name);
}

const char* graph_space_name(GraphSpace space) {
  return space == GraphSpace::Coordinates ? "coordinates" : "features";
}

SparseGraph rebuild_graph(const Matrix& kept_points, const Matrix& kept_features,
                          int k, GraphSpace space) {
  const Matrix& rows = space == GraphSpace::Coordinates ? kept_points : kept_features;
  return build_knn_graph(rows, k);
}

std::vector<int> uniform_sample_indices(int n, int n_keep, Rng& rng) {
  if (n_keep < 1 || n_keep > n) throw std::invalid_argument("uniform_sample_indices: n_keep out of range");
  // Partial Fisher-Yates over an index array; only the first n_keep slots
  // are consumed.
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n_keep; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - i)));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  }
  idx.resize(static_cast<size_t>(n_keep));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> farthest_point_sample(const Matrix& points, int n_keep, int start) {
  const int n = static_cast<int>(points.rows());
  if (n_keep < 1 || n_keep > n) throw std::invalid_argument("farthest_point_sample: n_keep out of range");
  if (start < 0 || start >= n) throw std::invalid_argument("farthest_point_sample: start out of range");
  std::vector<int> kept;
  kept.reserve(static_cast<size_t>(n_keep));
  kept.push_back(start);
  std::vector<double> best(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  int last = start;
  while (static_cast<int>(kept.size()) < n_keep) {
    int next = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = (points.row(i) - points.row(last)).squaredNorm();
      if (d < best[static_cast<size_t>(i)]) best[static_cast<size_t>(i)] = d;
      // Ties go to the lower index: strict > only.
      if (best[static_cast<size_t>(i)] > far) {
        far = best[static_cast<size_t>(i)];
        next = i;
      }
    }
    kept.push_back(next);
    last = next;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

} // namespace tinet
