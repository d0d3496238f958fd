// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "tinet/errors.hpp"
#include "tinet/io.hpp"
#include "tinet/model.hpp"
#include "tinet/util.hpp"

namespace tinet {

Dataset load_dataset(const std::string& manifest_path) {
  Dataset ds;
  for (const ManifestEntry& e : load_manifest(manifest_path)) {
    PointCloud cloud = load_cloud(e.path);
    cloud.label = e.label;
    ds.items.push_back(std::move(cloud));
  }
  return ds;
}

namespace {

std::vector<int> label_counts(const Dataset& ds, int class_count) {
  std::vector<int> counts(static_cast<size_t>(class_count), 0);
  for (const PointCloud& c : ds.items) {
    if (c.label < 0 || c.label >= class_count)
      throw DataError("dataset label " + std::to_string(c.label) + " out of range (class_count " +
                      std::to_string(class_count) + ")");
    counts[static_cast<size_t>(c.label)]++;
  }
  return counts;
}

} // namespace

Vector class_weights(const Dataset& ds, int class_count, bool weighted) {
  const std::vector<int> counts = label_counts(ds, class_count);
  Vector w = Vector::Ones(class_count);
  if (!weighted) return w;
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < class_count; ++c) {
    if (counts[static_cast<size_t>(c)] > 0) {
      w(c) = 1.0 / counts[static_cast<size_t>(c)];
      sum += w(c);
      ++present;
    } else {
      w(c) = 0.0;
    }
  }
  if (present == 0) throw DataError("empty dataset");
  const double mean = sum / present;
  for (int c = 0; c < class_count; ++c) w(c) /= mean;
  return w;
}

SgdState sgd_init(Model& m, double lr, double momentum) {
  SgdState s;
  s.lr = lr;
  s.momentum = momentum;
  for (const TensorRef& t : model_tensors(m))
    s.velocity.push_back(Matrix::Zero(t.data->rows(), t.data->cols()));
  return s;
}

void sgd_step(Model& m, SgdState& opt, const std::vector<Matrix>& grads) {
  const std::vector<TensorRef> refs = model_tensors(m);
  if (refs.size() != grads.size() || refs.size() != opt.velocity.size())
    throw std::invalid_argument("sgd_step: gradient count mismatch");
  for (size_t i = 0; i < refs.size(); ++i) {
    opt.velocity[i] = opt.momentum * opt.velocity[i] - opt.lr * grads[i];
    *refs[i].data += opt.velocity[i];
  }
}

namespace {

std::string fmt_acc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

PointCloud augment(const PointCloud& cloud, AugmentMode mode, Rng& rng) {
  if (mode == AugmentMode::None) return cloud;
  const RotationMode rot =
      mode == AugmentMode::Z ? RotationMode::AzimuthalZ : RotationMode::UniformSo3;
  return apply_transform(cloud, random_rotation(rng, rot));
}

double l2_penalty(const Model& m) {
  if (m.cfg.l2 == 0.0) return 0.0;
  double penalty = 0.0;
  for (const CTensorRef& t : model_tensors(m))
    if (t.is_weight) penalty += t.data->squaredNorm();
  return m.cfg.l2 * penalty;
}

} // namespace

std::string metrics_csv(const std::vector<EpochMetrics>& rows) {
  std::string out = "epoch,train_loss,train_acc,val_acc\n";
  for (const EpochMetrics& r : rows) {
    out += std::to_string(r.epoch);
    out += ',';
    out += fmt_g17(r.train_loss);
    out += ',';
    out += fmt_acc(r.train_acc);
    out += ',';
    out += fmt_acc(r.val_acc);
    out += '\n';
  }
  return out;
}

std::vector<EpochMetrics> train_model(Model& m, const Dataset& train_set,
                                      const Dataset* val_set, const TrainConfig& tc) {
  if (train_set.items.empty()) throw DataError("empty dataset");
  if (tc.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (tc.lr < 0.0) throw std::invalid_argument("train: learning rate must be >= 0");
  if (tc.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");

  const int n = static_cast<int>(train_set.items.size());
  const Vector weights = class_weights(train_set, m.cfg.class_count, tc.class_weighting);
  SgdState opt = sgd_init(m, tc.lr, tc.momentum);
  const std::vector<TensorRef> refs = model_tensors(m);

  std::vector<EpochMetrics> history;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const std::uint64_t epoch_seed = Rng::child_seed(tc.seed, static_cast<std::uint64_t>(epoch));

    // Deterministic per-epoch reshuffle (Fisher-Yates on a fixed stream).
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(Rng::child_seed(epoch_seed, 0));
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.next_below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    double ce_sum = 0.0;
    int correct = 0;
    for (int start = 0; start < n; start += tc.batch_size) {
      const int bsz = std::min(tc.batch_size, n - start);

      // Per-sample work is independent (one child stream per sample slot:
      // rotation first, then dropout) and lands in disjoint slots, so the
      // batch parallelizes without affecting the bytes produced.
      std::vector<std::vector<Matrix>> sample_grads(static_cast<size_t>(bsz));
      std::vector<double> sample_ce(static_cast<size_t>(bsz), 0.0);
      std::vector<char> sample_correct(static_cast<size_t>(bsz), 0);
      parallel_for(bsz, [&](int bi) {
        const int pos = start + bi;
        const int s = order[static_cast<size_t>(pos)];
        const PointCloud& item = train_set.items[static_cast<size_t>(s)];
        Rng srng(Rng::child_seed(epoch_seed, static_cast<std::uint64_t>(1 + pos)));
        const PointCloud pc = augment(item, tc.rotation, srng);
        ModelCache cache;
        const Vector logits = model_forward(m, pc, true, &srng, &cache);
        const double w = weights(item.label);
        sample_ce[static_cast<size_t>(bi)] = w * softmax_cross_entropy(logits, item.label);
        sample_correct[static_cast<size_t>(bi)] = argmax_index(logits) == item.label ? 1 : 0;
        sample_grads[static_cast<size_t>(bi)] = model_backward(m, cache, item.label, w);
      });

      // Accumulate in slot order: results are independent of the schedule.
      std::vector<Matrix> acc;
      for (const TensorRef& t : refs) acc.push_back(Matrix::Zero(t.data->rows(), t.data->cols()));
      for (int bi = 0; bi < bsz; ++bi) {
        ce_sum += sample_ce[static_cast<size_t>(bi)];
        correct += sample_correct[static_cast<size_t>(bi)];
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += sample_grads[static_cast<size_t>(bi)][i];
      }
      for (Matrix& g : acc) g /= bsz;
      add_l2_gradients(m, acc);
      sgd_step(m, opt, acc);
    }

    EpochMetrics em;
    em.epoch = epoch + 1;
    em.train_loss = ce_sum / n + l2_penalty(m);
    em.train_acc = static_cast<double>(correct) / n;
    em.val_acc = val_set != nullptr
                     ? evaluate_model(m, *val_set, tc.rotation, Rng::child_seed(epoch_seed, 0x564C))
                           .accuracy
                     : std::nan("");
    history.push_back(em);
  }
  return history;
}

EvalResult evaluate_model(const Model& m, const Dataset& ds, AugmentMode mode,
                          std::uint64_t seed) {
  if (ds.items.empty()) throw DataError("empty dataset");
  const int classes = m.cfg.class_count;
  const std::vector<int> counts = label_counts(ds, classes);
  const int n = static_cast<int>(ds.items.size());

  EvalResult res;
  res.predicted.assign(static_cast<size_t>(n), -1);
  parallel_for(n, [&](int i) {
    Rng rng(Rng::child_seed(seed, static_cast<std::uint64_t>(i)));
    const PointCloud pc = augment(ds.items[static_cast<size_t>(i)], mode, rng);
    res.predicted[static_cast<size_t>(i)] = argmax_index(model_forward(m, pc));
  });

  res.confusion = IMatrix::Zero(classes, classes);
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const int truth = ds.items[static_cast<size_t>(i)].label;
    const int pred = res.predicted[static_cast<size_t>(i)];
    res.confusion(truth, pred)++;
    if (truth == pred) ++correct;
  }
  res.accuracy = static_cast<double>(correct) / n;
  res.per_class = Vector::Zero(classes);
  for (int c = 0; c < classes; ++c)
    if (counts[static_cast<size_t>(c)] > 0)
      res.per_class(c) =
          static_cast<double>(res.confusion(c, c)) / counts[static_cast<size_t>(c)];
  return res;
}

} // namespace tinet
