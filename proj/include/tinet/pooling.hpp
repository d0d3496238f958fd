// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tinet/graph.hpp"
#include "tinet/rng.hpp"
#include "tinet/ti_encoder.hpp"
#include "tinet/types.hpp"

namespace tinet {

/// Coarsening plan: which parent points survive and, for each survivor,
/// the m-NN cluster (itself included) that local max-pooling aggregates.
/// Clusters may overlap and non-kept points contribute through any
/// cluster containing them.
struct PoolingPlan {
  std::vector<int> kept; // indices into the parent resolution, score-sorted
  IMatrix clusters;      // kept.size() x m parent indices
  int m = 0;
};

enum class TiScoreMode { FirstContour, AllChannelNorm };

/// Saliency used for coarsening: first-order contour variance by default
/// (contour points stand out from their neighbours), or the L2 norm
/// across all raw channels.
Vector ti_score(const TiRawFeatures& raw, TiScoreMode mode = TiScoreMode::FirstContour);

/// Keeps the n_keep highest-scoring points (ties by ascending index) and
/// attaches each one's m nearest parent points in coordinate space.
PoolingPlan coarsen(const Matrix& parent_points, const Vector& scores, int n_keep, int m);
PoolingPlan coarsen(const Matrix& parent_points, const TiRawFeatures& raw, int n_keep, int m);

/// Local max-pool: output row r, channel f = max over cluster r of X(., f).
/// argmax (when given) receives the attaining parent row per entry, ties
/// to the lowest parent index.
Matrix pool_features(const PoolingPlan& plan, const Matrix& x, IMatrix* argmax = nullptr);

/// Routes each upstream entry to the parent (row, channel) that won the max.
Matrix pool_backward(const IMatrix& argmax, int parent_rows, const Matrix& upstream);

enum class GraphSpace { Coordinates, Features };

GraphSpace parse_graph_space(const std::string& name);
const char* graph_space_name(GraphSpace space);

/// Graph for the next resolution: kNN + Gaussian weights over the kept
/// rows, measured in coordinate space or in learned feature space.
SparseGraph rebuild_graph(const Matrix& kept_points, const Matrix& kept_features,
                          int k, GraphSpace space);

/// Reference samplers for coarsening comparisons only.
std::vector<int> uniform_sample_indices(int n, int n_keep, Rng& rng);
std::vector<int> farthest_point_sample(const Matrix& points, int n_keep, int start = 0);

} // namespace tinet
