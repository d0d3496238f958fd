// SPDX-License-Identifier: Apache-2.0
#include "tinet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tinet/errors.hpp"
#include "tinet/util.hpp"

namespace tinet {

InputMode parse_input_mode(const std::string& name) {
  if (name == "ti_features") return InputMode::TiFeatures;
  if (name == "raw_coordinates") return InputMode::RawCoordinates;
  throw std::invalid_argument("unknown input mode: " + name);
}

const char* input_mode_name(InputMode mode) {
  return mode == InputMode::TiFeatures ? "ti_features" : "raw_coordinates";
}

AugmentMode parse_augment_mode(const std::string& name) {
  if (name == "none") return AugmentMode::None;
  if (name == "z") return AugmentMode::Z;
  if (name == "so3") return AugmentMode::So3;
  throw std::invalid_argument("unknown rotation mode: " + name);
}

const char* augment_mode_name(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::None: return "none";
    case AugmentMode::Z: return "z";
    default: return "so3";
  }
}

namespace {

int config_int(const std::string& key, const std::string& value) {
  long v = 0;
  if (!parse_long(value, v)) throw DataError("config: bad integer for " + key + ": " + value);
  return static_cast<int>(v);
}

double config_real(const std::string& key, const std::string& value) {
  double v = 0.0;
  if (!parse_double(value, v)) throw DataError("config: bad number for " + key + ": " + value);
  return v;
}

bool config_flag(const std::string& key, const std::string& value) {
  if (value == "0") return false;
  if (value == "1") return true;
  throw DataError("config: flag " + key + " must be 0 or 1, got " + value);
}

std::vector<int> config_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split(value, ','))
    out.push_back(config_int(key, item));
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

} // namespace

ModelConfig parse_model_config(const std::string& text) {
  ModelConfig cfg;
  std::istringstream iss(text);
  std::string token;
  while (iss >> token) {
    const size_t eq = token.find('=');
    if (eq == std::string::npos) throw DataError("config: expected key=value, got " + token);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key.rfind("ckpt_", 0) == 0) continue;
    try {
    if (key == "input_mode") cfg.input_mode = parse_input_mode(value);
    else if (key == "ti_order") cfg.ti_order = config_int(key, value);
    else if (key == "ti_channels") cfg.ti_channels = config_int(key, value);
    else if (key == "ti_include_order0") cfg.ti_include_order0 = config_flag(key, value);
    else if (key == "graph_k") cfg.graph_k = config_int(key, value);
    else if (key == "gcn_widths") cfg.gcn_widths = config_int_list(key, value);
    else if (key == "gcn_kcheb") cfg.gcn_kcheb = config_int_list(key, value);
    else if (key == "scalar_theta") cfg.scalar_theta = config_flag(key, value);
    else if (key == "pool_enable") cfg.pool_enable = config_flag(key, value);
    else if (key == "pool_ratio") cfg.pool_ratio = config_int(key, value);
    else if (key == "pool_m") cfg.pool_m = config_int(key, value);
    else if (key == "pool_k") cfg.pool_k = config_int(key, value);
    else if (key == "pool_space") cfg.pool_space = parse_graph_space(value);
    else if (key == "dense_widths") cfg.dense_widths = config_int_list(key, value);
    else if (key == "dropout_keep") cfg.dropout_keep = config_real(key, value);
    else if (key == "l2") cfg.l2 = config_real(key, value);
    else if (key == "class_count") cfg.class_count = config_int(key, value);
    else if (key == "normalize") cfg.normalize = config_flag(key, value);
    else throw DataError("config: unknown key " + key);
    } catch (const std::invalid_argument& e) {
      // Enum-valued keys raise invalid_argument; inside a config these are
      // data errors like any other malformed value.
      throw DataError("config: " + std::string(e.what()));
    }
  }
  validate_model_config(cfg);
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::string text;
  std::string line;
  while (std::getline(in, line)) {
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    text += line;
    text += '\n';
  }
  return parse_model_config(text);
}

std::string serialize_model_config(const ModelConfig& cfg) {
  std::ostringstream out;
  out << "input_mode=" << input_mode_name(cfg.input_mode)
      << " ti_order=" << cfg.ti_order
      << " ti_channels=" << cfg.ti_channels
      << " ti_include_order0=" << (cfg.ti_include_order0 ? 1 : 0)
      << " graph_k=" << cfg.graph_k
      << " gcn_widths=" << join_ints(cfg.gcn_widths)
      << " gcn_kcheb=" << join_ints(cfg.gcn_kcheb)
      << " scalar_theta=" << (cfg.scalar_theta ? 1 : 0)
      << " pool_enable=" << (cfg.pool_enable ? 1 : 0)
      << " pool_ratio=" << cfg.pool_ratio
      << " pool_m=" << cfg.pool_m
      << " pool_k=" << cfg.pool_k
      << " pool_space=" << graph_space_name(cfg.pool_space)
      << " dense_widths=" << join_ints(cfg.dense_widths)
      << " dropout_keep=" << fmt_g17(cfg.dropout_keep)
      << " l2=" << fmt_g17(cfg.l2)
      << " class_count=" << cfg.class_count
      << " normalize=" << (cfg.normalize ? 1 : 0);
  return out.str();
}

void validate_model_config(const ModelConfig& cfg) {
  auto bad = [](const std::string& msg) { throw DataError("config: " + msg); };
  if (cfg.ti_order < 1) bad("ti_order must be >= 1");
  if (cfg.ti_channels < 1) bad("ti_channels must be >= 1");
  if (cfg.graph_k < 1) bad("graph_k must be >= 1");
  if (cfg.gcn_widths.empty()) bad("gcn_widths must be non-empty");
  if (cfg.gcn_widths.size() != cfg.gcn_kcheb.size())
    bad("gcn_widths and gcn_kcheb must have the same length");
  for (int w : cfg.gcn_widths)
    if (w < 1) bad("gcn widths must be >= 1");
  for (int k : cfg.gcn_kcheb)
    if (k < 1) bad("gcn_kcheb entries must be >= 1");
  if (cfg.pool_ratio < 1) bad("pool_ratio must be >= 1");
  if (cfg.pool_m < 1) bad("pool_m must be >= 1");
  if (cfg.pool_k < 1) bad("pool_k must be >= 1");
  if (cfg.dense_widths.empty()) bad("dense_widths must be non-empty");
  for (int w : cfg.dense_widths)
    if (w < 1) bad("dense widths must be >= 1");
  if (!(cfg.dropout_keep > 0.0 && cfg.dropout_keep <= 1.0))
    bad("dropout_keep must be in (0, 1]");
  if (cfg.l2 < 0.0) bad("l2 must be >= 0");
  if (cfg.class_count < 2) bad("class_count must be >= 2");
}

std::vector<TensorRef> model_tensors(Model& m) {
  std::vector<TensorRef> t;
  if (m.cfg.input_mode == InputMode::TiFeatures) {
    t.push_back({"ti.theta", &m.ti.theta, true});
    t.push_back({"ti.bias", &m.ti.bias, false});
  }
  for (size_t l = 0; l < m.gcn.size(); ++l) {
    const std::string base = "gcn" + std::to_string(l);
    for (size_t k = 0; k < m.gcn[l].weights.size(); ++k)
      t.push_back({base + ".w" + std::to_string(k), &m.gcn[l].weights[k], true});
    if (m.gcn[l].scalar_theta) t.push_back({base + ".theta", &m.gcn[l].theta, true});
    t.push_back({base + ".bias", &m.gcn[l].bias, false});
  }
  for (size_t j = 0; j < m.dense.size(); ++j) {
    const std::string base = "dense" + std::to_string(j);
    t.push_back({base + ".w", &m.dense[j].w, true});
    t.push_back({base + ".b", &m.dense[j].b, false});
  }
  return t;
}

std::vector<CTensorRef> model_tensors(const Model& m) {
  std::vector<CTensorRef> out;
  for (const TensorRef& t : model_tensors(const_cast<Model&>(m)))
    out.push_back({t.name, t.data, t.is_weight});
  return out;
}

namespace {

Matrix glorot_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.next_double() - 1.0) * bound;
  return m;
}

} // namespace

Model init_model(const ModelConfig& cfg, std::uint64_t seed) {
  validate_model_config(cfg);
  Model m;
  m.cfg = cfg;
  Rng rng(seed);
  int f_prev = 3;
  if (cfg.input_mode == InputMode::TiFeatures) {
    const int orders = cfg.ti_order + (cfg.ti_include_order0 ? 1 : 0);
    const int channels = 2 * orders;
    m.ti.theta = glorot_uniform(channels, cfg.ti_channels, rng);
    m.ti.bias = Matrix::Zero(1, cfg.ti_channels);
    f_prev = cfg.ti_channels;
  }
  for (size_t l = 0; l < cfg.gcn_widths.size(); ++l) {
    m.gcn.push_back(cheb_layer_init(f_prev, cfg.gcn_widths[l], cfg.gcn_kcheb[l],
                                    Activation::Relu, cfg.scalar_theta, rng));
    f_prev = cfg.gcn_widths[l];
  }
  std::vector<int> head = cfg.dense_widths;
  head.push_back(cfg.class_count);
  for (int width : head) {
    DenseParams d;
    d.w = glorot_uniform(f_prev, width, rng);
    d.b = Matrix::Zero(1, width);
    m.dense.push_back(std::move(d));
    f_prev = width;
  }
  return m;
}

namespace {

void check_finite(const Matrix& m, const std::string& where) {
  if (!m.allFinite()) throw NumericError("non-finite activations at " + where);
}

} // namespace

Vector model_forward(const Model& m, const PointCloud& cloud, bool training, Rng* rng,
                     ModelCache* cache) {
  const ModelConfig& cfg = m.cfg;
  ModelCache local;
  ModelCache& c = cache != nullptr ? *cache : local;
  c = ModelCache{};

  PointCloud work = cfg.normalize ? normalize_unit_sphere(cloud) : cloud;
  const int n = work.n();
  if (n < 2) throw DataError("cloud too small for graph construction (need >= 2 points)");
  c.points = work.points;

  const int k_eff = std::min(cfg.graph_k, n - 1);
  SparseGraph g = build_knn_graph(c.points, k_eff);

  const bool need_lrw = cfg.input_mode == InputMode::TiFeatures || cfg.pool_enable;
  Laplacian l_rw;
  if (need_lrw) l_rw = laplacian(g, LaplacianKind::RandomWalk);

  Matrix x;
  if (cfg.input_mode == InputMode::TiFeatures) {
    c.raw = ti_raw_features(l_rw, c.points, cfg.ti_order, cfg.ti_include_order0);
    c.raw_concat = ti_concat(c.raw);
    x = ti_layer_forward(c.raw_concat, m.ti);
    check_finite(x, "ti layer");
  } else {
    x = c.points;
  }

  ScaledLaplacian lt = scale_laplacian(laplacian(g, LaplacianKind::SymmetricNormalized));

  for (size_t l = 0; l < m.gcn.size(); ++l) {
    c.gcn_in.push_back(x);
    c.lts.push_back(lt);
    ChebCache cc;
    try {
      x = cheb_forward(lt, x, m.gcn[l], &cc);
    } catch (const NumericError& e) {
      throw NumericError("gcn layer " + std::to_string(l) + ": " + e.what());
    }
    c.gcn_cache.push_back(std::move(cc));

    if (l == 0 && cfg.pool_enable) {
      const int n_keep = std::min(n, std::max(2, n / cfg.pool_ratio));
      const Vector scores = cfg.input_mode == InputMode::TiFeatures
                                ? ti_score(c.raw)
                                : Vector(contour_variance(l_rw, c.points, 1).col(0));
      PoolingPlan plan = coarsen(c.points, scores, n_keep, std::min(cfg.pool_m, n));
      c.pool_parent_rows = n;
      x = pool_features(plan, x, &c.pool_argmax);
      Matrix kept_points(n_keep, 3);
      for (int r = 0; r < n_keep; ++r)
        kept_points.row(r) = c.points.row(plan.kept[static_cast<size_t>(r)]);
      SparseGraph g2 =
          rebuild_graph(kept_points, x, std::min(cfg.pool_k, n_keep - 1), cfg.pool_space);
      lt = scale_laplacian(laplacian(g2, LaplacianKind::SymmetricNormalized));
      c.plan = std::move(plan);
      c.pooled = true;
    }
  }

  // Global max pool over nodes; gradient ties route to the lowest index.
  const long f_global = x.cols();
  c.descriptor = Matrix(1, f_global);
  c.gmax_rows.assign(static_cast<size_t>(f_global), 0);
  for (long f = 0; f < f_global; ++f) {
    double best = x(0, f);
    int best_row = 0;
    for (long r = 1; r < x.rows(); ++r)
      if (x(r, f) > best) {
        best = x(r, f);
        best_row = static_cast<int>(r);
      }
    c.descriptor(0, f) = best;
    c.gmax_rows[static_cast<size_t>(f)] = best_row;
  }

  const size_t hidden = m.dense.size() - 1;
  Matrix h = c.descriptor;
  for (size_t j = 0; j < m.dense.size(); ++j) {
    c.dense_in.push_back(h);
    Matrix z = h * m.dense[j].w;
    z.row(0) += m.dense[j].b.row(0);
    check_finite(z, "dense layer " + std::to_string(j));
    if (j < hidden) {
      c.dense_pre.push_back(z);
      h = z.cwiseMax(0.0);
      if (training && cfg.dropout_keep < 1.0) {
        if (rng == nullptr)
          throw std::invalid_argument("model_forward: training with dropout requires an rng");
        Matrix mask(1, h.cols());
        for (long col = 0; col < h.cols(); ++col)
          mask(0, col) = rng->next_double() < cfg.dropout_keep ? 1.0 / cfg.dropout_keep : 0.0;
        h = h.cwiseProduct(mask);
        c.drop_mask.push_back(std::move(mask));
      }
    } else {
      h = std::move(z);
    }
  }

  c.logits = h.row(0).transpose();
  return c.logits;
}

int argmax_index(const Vector& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

double softmax_cross_entropy(const Vector& logits, int label) {
  if (label < 0 || label >= static_cast<int>(logits.size()))
    throw std::invalid_argument("softmax_cross_entropy: label out of range");
  const double zmax = logits.maxCoeff();
  const double lse = zmax + std::log((logits.array() - zmax).exp().sum());
  return lse - logits(label);
}

double model_loss(const Model& m, const Vector& logits, int label, double class_weight) {
  double penalty = 0.0;
  for (const CTensorRef& t : model_tensors(m))
    if (t.is_weight) penalty += t.data->squaredNorm();
  return class_weight * softmax_cross_entropy(logits, label) + m.cfg.l2 * penalty;
}

std::vector<Matrix> model_backward(const Model& m, const ModelCache& cache, int label,
                                   double class_weight) {
  const int classes = static_cast<int>(cache.logits.size());
  if (label < 0 || label >= classes)
    throw std::invalid_argument("model_backward: label out of range");
  if (cache.gcn_cache.size() != m.gcn.size())
    throw std::invalid_argument("model_backward: forward cache missing");

  // d(loss)/d(logits) for weighted softmax cross-entropy.
  const Vector& z = cache.logits;
  const double zmax = z.maxCoeff();
  Vector p = (z.array() - zmax).exp().matrix();
  p /= p.sum();
  p(label) -= 1.0;
  p *= class_weight;

  std::vector<Matrix> dense_dw(m.dense.size());
  std::vector<Matrix> dense_db(m.dense.size());
  Matrix gz = p.transpose(); // gradient w.r.t. the current layer's preactivation
  for (size_t j = m.dense.size(); j-- > 0;) {
    dense_dw[j] = cache.dense_in[j].transpose() * gz;
    dense_db[j] = gz;
    if (j == 0) {
      gz = gz * m.dense[j].w.transpose();
      break;
    }
    Matrix gout = gz * m.dense[j].w.transpose();
    const size_t prev = j - 1;
    if (!cache.drop_mask.empty() && prev < cache.drop_mask.size())
      gout = gout.cwiseProduct(cache.drop_mask[prev]);
    for (long col = 0; col < gout.cols(); ++col)
      if (!(cache.dense_pre[prev](0, col) > 0.0)) gout(0, col) = 0.0;
    gz = std::move(gout);
  }

  // Global max pool: route each channel's gradient to its argmax node.
  // n_last = rows of the matrix the global pool saw (pooled when the
  // pooling stage sits after the final GCN layer).
  const long n_last = cache.pooled && m.gcn.size() == 1
                          ? cache.pool_argmax.rows()
                          : cache.gcn_cache.back().preact.rows();
  Matrix up = Matrix::Zero(n_last, gz.cols());
  for (long f = 0; f < gz.cols(); ++f)
    up(cache.gmax_rows[static_cast<size_t>(f)], f) = gz(0, f);

  std::vector<ChebGrads> gcn_grads(m.gcn.size());
  for (size_t l = m.gcn.size(); l-- > 0;) {
    if (cache.pooled && m.gcn.size() == 1 && l == 0)
      up = pool_backward(cache.pool_argmax, cache.pool_parent_rows, up);
    gcn_grads[l] = cheb_backward(cache.lts[l], m.gcn[l], cache.gcn_cache[l], up);
    up = std::move(gcn_grads[l].input);
    if (cache.pooled && l == 1)
      up = pool_backward(cache.pool_argmax, cache.pool_parent_rows, up);
  }

  std::vector<Matrix> grads;
  if (m.cfg.input_mode == InputMode::TiFeatures) {
    Matrix dtheta;
    Matrix dbias;
    ti_layer_backward(cache.raw_concat, up, dtheta, dbias);
    grads.push_back(std::move(dtheta));
    grads.push_back(std::move(dbias));
  }
  for (size_t l = 0; l < m.gcn.size(); ++l) {
    for (Matrix& w : gcn_grads[l].weights) grads.push_back(std::move(w));
    if (m.gcn[l].scalar_theta) grads.push_back(std::move(gcn_grads[l].theta));
    grads.push_back(std::move(gcn_grads[l].bias));
  }
  for (size_t j = 0; j < m.dense.size(); ++j) {
    grads.push_back(std::move(dense_dw[j]));
    grads.push_back(std::move(dense_db[j]));
  }
  return grads;
}

void add_l2_gradients(const Model& m, std::vector<Matrix>& grads) {
  if (m.cfg.l2 == 0.0) return;
  const std::vector<CTensorRef> refs = model_tensors(m);
  if (refs.size() != grads.size())
    throw std::invalid_argument("add_l2_gradients: gradient count mismatch");
  for (size_t i = 0; i < refs.size(); ++i)
    if (refs[i].is_weight) grads[i] += 2.0 * m.cfg.l2 * (*refs[i].data);
}

} // namespace tinet
