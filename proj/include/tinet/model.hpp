// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tinet/cheb_gcn.hpp"
#include "tinet/pointcloud.hpp"
#include "tinet/pooling.hpp"
#include "tinet/ti_encoder.hpp"
#include "tinet/types.hpp"

namespace tinet {

enum class InputMode { TiFeatures, RawCoordinates };
enum class AugmentMode { None, Z, So3 };

InputMode parse_input_mode(const std::string& name);
const char* input_mode_name(InputMode mode);
AugmentMode parse_augment_mode(const std::string& name);
const char* augment_mode_name(AugmentMode mode);

/// Classifier architecture and regularization, serializable as a flat
/// key=value list. Defaults give the desk-scale full model:
/// TI(K=3, 32) -> GCN(64) -> pool(N/4, m=8) -> GCN(128) -> global max
/// pool -> dense [256, 64, class_count].
struct ModelConfig {
  InputMode input_mode = InputMode::TiFeatures;
  int ti_order = 3;
  int ti_channels = 32;
  bool ti_include_order0 = false;
  int graph_k = 16;
  std::vector<int> gcn_widths = {64, 128};
  std::vector<int> gcn_kcheb = {3, 3};
  bool scalar_theta = false;
  bool pool_enable = true;
  int pool_ratio = 4; // keep max(2, N / pool_ratio) points after the first GCN
  int pool_m = 8;
  int pool_k = 16;
  GraphSpace pool_space = GraphSpace::Coordinates;
  std::vector<int> dense_widths = {256, 64}; // hidden; output to class_count implied
  double dropout_keep = 0.7;
  double l2 = 1e-4;
  int class_count = 5;
  bool normalize = true;
};

/// Parses whitespace-separated "key=value" tokens. Keys with a "ckpt_"
/// prefix (checkpoint metadata) are skipped; other unknown keys are data
/// errors.
ModelConfig parse_model_config(const std::string& text);
ModelConfig load_model_config(const std::string& path);
std::string serialize_model_config(const ModelConfig& cfg);
void validate_model_config(const ModelConfig& cfg);

struct TrainConfig {
  int batch_size = 16;
  int epochs = 100;
  double lr = 0.02;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  bool class_weighting = true;
  AugmentMode rotation = AugmentMode::None;
};

struct DenseParams {
  Matrix w;
  Matrix b; // 1 x F_out
};

struct TensorRef {
  std::string name;
  Matrix* data = nullptr;
  bool is_weight = false; // participates in the L2 penalty
};

struct CTensorRef {
  std::string name;
  const Matrix* data = nullptr;
  bool is_weight = false;
};

struct Model {
  ModelConfig cfg;
  TiLayerParams ti; // ti_features mode only
  std::vector<ChebLayerParams> gcn;
  std::vector<DenseParams> dense; // hidden layers then the output layer
};

/// Every trainable tensor in declared order; the checkpoint block order,
/// the gradient vector order, and the optimizer slot order all follow it.
std::vector<TensorRef> model_tensors(Model& m);
std::vector<CTensorRef> model_tensors(const Model& m);

Model init_model(const ModelConfig& cfg, std::uint64_t seed);

struct ModelCache {
  Matrix points; // stage-0 coordinates after optional normalization
  TiRawFeatures raw;
  Matrix raw_concat;
  std::vector<Matrix> gcn_in;
  std::vector<ScaledLaplacian> lts;
  std::vector<ChebCache> gcn_cache;
  bool pooled = false;
  PoolingPlan plan;
  IMatrix pool_argmax;
  int pool_parent_rows = 0;
  Matrix descriptor;          // 1 x F, the global feature vector
  std::vector<int> gmax_rows; // argmax node per channel, ties lowest
  std::vector<Matrix> dense_in;
  std::vector<Matrix> dense_pre;  // hidden-layer preactivations
  std::vector<Matrix> drop_mask;  // inverted-dropout masks, training only
  Vector logits;
};

/// Full pipeline: normalize -> graph -> [TI encode | raw coords] -> GCN
/// stack with the optional pooling stage -> global max pool -> dense head.
/// `rng` drives dropout and is required when training with keep < 1.
Vector model_forward(const Model& m, const PointCloud& cloud, bool training = false,
                     Rng* rng = nullptr, ModelCache* cache = nullptr);

int argmax_index(const Vector& v); // ties to the lowest index

double softmax_cross_entropy(const Vector& logits, int label);

/// class_weight * cross-entropy + l2 * sum of squared weight norms
/// (biases excluded).
double model_loss(const Model& m, const Vector& logits, int label, double class_weight = 1.0);

/// Gradients of class_weight * cross-entropy, aligned with model_tensors
/// order. The L2 term is added separately (once per batch, not per sample).
std::vector<Matrix> model_backward(const Model& m, const ModelCache& cache, int label,
                                   double class_weight = 1.0);
void add_l2_gradients(const Model& m, std::vector<Matrix>& grads);

struct Dataset {
  std::vector<PointCloud> items; // labels carried on the clouds
};

Dataset load_dataset(const std::string& manifest_path);

/// Inverse class frequency normalized to mean 1 over the classes present;
/// all ones when weighting is off.
Vector class_weights(const Dataset& ds, int class_count, bool weighted);

struct SgdState {
  double lr = 0.0;
  double momentum = 0.0;
  std::vector<Matrix> velocity;
};

SgdState sgd_init(Model& m, double lr, double momentum);
void sgd_step(Model& m, SgdState& opt, const std::vector<Matrix>& grads);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0; // nan without a held-out set
};

/// "epoch,train_loss,train_acc,val_acc" rows; the byte-stable format the
/// determinism contract is stated over.
std::string metrics_csv(const std::vector<EpochMetrics>& rows);

/// Mini-batch SGD with momentum, per-epoch reshuffle, rotation
/// augmentation per sample, and inverted dropout. Deterministic given
/// the seed.
std::vector<EpochMetrics> train_model(Model& m, const Dataset& train_set,
                                      const Dataset* val_set, const TrainConfig& tc);

struct EvalResult {
  double accuracy = 0.0;
  Vector per_class;
  IMatrix confusion; // rows: true label, cols: predicted
  std::vector<int> predicted;
};

/// Applies the named rotation augmentation per sample (seeded child
/// streams, so parallel evaluation stays deterministic).
EvalResult evaluate_model(const Model& m, const Dataset& ds, AugmentMode mode,
                          std::uint64_t seed);

/// Text checkpoint. Line 1: "3DTI-CKPT v1". Line 2: flat config plus
/// ckpt_epoch / ckpt_seed metadata. Then per tensor: "name rows cols" and
/// row-major values at 17 significant digits (bitwise round trip).
void save_checkpoint(const Model& m, const std::string& path, int epoch = 0,
                     std::uint64_t seed = 0);

struct LoadedCheckpoint {
  Model model;
  int epoch = 0;
  std::uint64_t seed = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace tinet
