// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface for the 3DTI pipeline: dataset generation, feature
// dumps, coarsening comparisons, training, evaluation, the z/SO(3) rotation
// experiment, and timing. CSV results go to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tinet/errors.hpp"
#include "tinet/io.hpp"
#include "tinet/model.hpp"
#include "tinet/shapes.hpp"
#include "tinet/util.hpp"

namespace {

using namespace tinet;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
};

int run_gen_data(const GlobalOpts& g, const std::string& out_dir,
                 const std::string& class_list, int per_class, int points, double jitter_sigma) {
  const std::vector<std::string> names = split(class_list, ',');
  if (names.empty()) throw std::invalid_argument("gen-data: empty class list");
  std::vector<ShapeKind> kinds;
  for (const std::string& n : names) kinds.push_back(parse_shape_kind(n));
  if (per_class < 1) throw std::invalid_argument("gen-data: per-class must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("gen-data: cannot create directory " + out_dir);

  std::vector<ManifestEntry> manifest;
  for (size_t c = 0; c < kinds.size(); ++c) {
    for (int i = 0; i < per_class; ++i) {
      SyntheticShapeSpec spec;
      spec.kind = kinds[c];
      spec.n = points;
      spec.jitter_sigma = jitter_sigma;
      spec.seed = Rng::child_seed(g.seed, c * static_cast<size_t>(per_class) + i);
      const PointCloud cloud = generate_shape(spec);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04d.xyz", names[c].c_str(), i);
      write_xyz(cloud, out_dir + "/" + name);
      manifest.push_back({name, static_cast<int>(c)});
    }
  }
  const std::string manifest_path = out_dir + "/manifest.tsv";
  write_manifest(manifest, manifest_path);
  std::cerr << "wrote " << manifest.size() << " clouds and " << manifest_path << "\n";
  return 0;
}

int run_encode(const std::string& in_path, int k, int order, bool include_order0,
               bool l2_normalize, const std::string& out_path) {
  const PointCloud cloud = load_cloud(in_path);
  if (cloud.n() < 2) throw DataError("encode: need at least 2 points");
  const int k_eff = std::min(k, cloud.n() - 1);
  const SparseGraph g = build_knn_graph(cloud.points, k_eff);
  const Laplacian l_rw = laplacian(g, LaplacianKind::RandomWalk);
  const TiRawFeatures raw = ti_raw_features(l_rw, cloud.points, order, include_order0);
  Matrix table = ti_concat(raw);
  if (l2_normalize) {
    const double norm = table.norm();
    if (norm == 0.0) throw NumericError("encode: feature table is identically zero");
    table /= norm;
  }
  write_table(table, out_path);
  std::cerr << "wrote " << table.rows() << "x" << table.cols() << " feature table to "
            << out_path << "\n";
  return 0;
}

int run_coarsen(const GlobalOpts& g, const std::string& in_path, int k, int keep, int m,
                const std::string& method) {
  const PointCloud cloud = load_cloud(in_path);
  std::vector<int> kept;
  if (method == "ti") {
    const int k_eff = std::min(k, cloud.n() - 1);
    const SparseGraph graph = build_knn_graph(cloud.points, k_eff);
    const Laplacian l_rw = laplacian(graph, LaplacianKind::RandomWalk);
    const TiRawFeatures raw = ti_raw_features(l_rw, cloud.points, 1);
    kept = coarsen(cloud.points, raw, keep, m).kept;
  } else if (method == "uniform") {
    Rng rng(g.seed);
    kept = uniform_sample_indices(cloud.n(), keep, rng);
  } else if (method == "fps") {
    kept = farthest_point_sample(cloud.points, keep);
  } else {
    throw std::invalid_argument("coarsen: unknown method " + method);
  }
  for (int idx : kept) std::cout << idx << "\n";
  return 0;
}

ModelConfig config_from(const std::string& config_path) {
  return config_path.empty() ? ModelConfig{} : load_model_config(config_path);
}

void emit_metrics(const std::vector<EpochMetrics>& history, const std::string& metrics_path) {
  const std::string csv = metrics_csv(history);
  std::cout << csv;
  if (!metrics_path.empty()) {
    std::ofstream out(metrics_path);
    if (!out) throw DataError("cannot write metrics file " + metrics_path);
    out << csv;
  }
}

int run_train(const GlobalOpts& g, const std::string& manifest, const std::string& val_manifest,
              const std::string& config_path, const std::string& ckpt_path,
              const std::string& metrics_path, const TrainConfig& tc_in,
              const std::string& rotation) {
  const ModelConfig cfg = config_from(config_path);
  TrainConfig tc = tc_in;
  tc.seed = g.seed;
  tc.rotation = parse_augment_mode(rotation);

  const Dataset train_set = load_dataset(manifest);
  Dataset val_set;
  const bool has_val = !val_manifest.empty();
  if (has_val) val_set = load_dataset(val_manifest);

  Model model = init_model(cfg, g.seed);
  const std::vector<EpochMetrics> history =
      train_model(model, train_set, has_val ? &val_set : nullptr, tc);
  emit_metrics(history, metrics_path);
  if (!ckpt_path.empty()) save_checkpoint(model, ckpt_path, tc.epochs, g.seed);
  return 0;
}

int run_eval(const GlobalOpts& g, const std::string& manifest, const std::string& ckpt_path,
             const std::string& mode) {
  const LoadedCheckpoint loaded = load_checkpoint(ckpt_path);
  const Dataset ds = load_dataset(manifest);
  const EvalResult res = evaluate_model(loaded.model, ds, parse_augment_mode(mode), g.seed);

  std::cout << "metric,value\n";
  std::cout << "accuracy," << res.accuracy << "\n";
  for (int c = 0; c < static_cast<int>(res.per_class.size()); ++c)
    std::cout << "class" << c << "_acc," << res.per_class(c) << "\n";
  std::cerr << "confusion rows=true cols=predicted:\n" << res.confusion << "\n";
  return 0;
}

int run_rotate_test(const GlobalOpts& g, const std::string& manifest,
                    const std::string& test_manifest, const std::string& config_path,
                    const TrainConfig& tc_in) {
  const ModelConfig cfg = config_from(config_path);
  TrainConfig tc = tc_in;
  tc.seed = g.seed;
  tc.rotation = AugmentMode::Z;

  const Dataset train_set = load_dataset(manifest);
  const Dataset test_set = load_dataset(test_manifest);

  Model model = init_model(cfg, g.seed);
  train_model(model, train_set, nullptr, tc);

  std::cout << "mode,accuracy\n";
  const AugmentMode modes[] = {AugmentMode::None, AugmentMode::Z, AugmentMode::So3};
  for (size_t i = 0; i < 3; ++i) {
    const EvalResult res =
        evaluate_model(model, test_set, modes[i], Rng::child_seed(g.seed, 101 + i));
    std::cout << augment_mode_name(modes[i]) << "," << res.accuracy << "\n";
  }
  return 0;
}

double median_ms(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_bench(const GlobalOpts& g, const std::string& points_list, const std::string& k_list,
              int repeat) {
  if (repeat < 1) throw std::invalid_argument("bench: repeat must be >= 1");
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  std::cout << "n,k,graph_ms,encode_ms,forward_ms\n";
  for (const std::string& ns : split(points_list, ',')) {
    for (const std::string& ks : split(k_list, ',')) {
      long n = 0;
      long k = 0;
      if (!parse_long(ns, n) || !parse_long(ks, k))
        throw std::invalid_argument("bench: bad --points/--k entry");
      SyntheticShapeSpec spec;
      spec.n = static_cast<int>(n);
      spec.seed = g.seed;
      const PointCloud cloud = generate_shape(spec);

      ModelConfig cfg;
      cfg.graph_k = static_cast<int>(k);
      const Model model = init_model(cfg, g.seed);

      std::vector<double> graph_ms, encode_ms, forward_ms;
      for (int r = 0; r < repeat; ++r) {
        auto t0 = clock::now();
        const SparseGraph graph = build_knn_graph(cloud.points, static_cast<int>(k));
        graph_ms.push_back(ms_since(t0));

        const Laplacian l_rw = laplacian(graph, LaplacianKind::RandomWalk);
        t0 = clock::now();
        const TiRawFeatures raw = ti_raw_features(l_rw, cloud.points, cfg.ti_order);
        encode_ms.push_back(ms_since(t0));
        (void)raw;

        t0 = clock::now();
        model_forward(model, cloud);
        forward_ms.push_back(ms_since(t0));
      }
      std::cout << n << "," << k << "," << median_ms(graph_ms) << "," << median_ms(encode_ms)
                << "," << median_ms(forward_ms) << "\n";
    }
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"3DTI point cloud classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Master seed for all randomized behavior");
  app.add_option("--threads", g.threads, "Worker thread bound (default 1)");

  // gen-data
  std::string gd_out, gd_classes = "sphere,cube,cylinder,cone,torus";
  int gd_per_class = 20, gd_points = 512;
  double gd_jitter = 0.0;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled dataset");
  gen->add_option("--out", gd_out, "Output directory")->required();
  gen->add_option("--classes", gd_classes, "Comma-separated shape names");
  gen->add_option("--per-class", gd_per_class, "Clouds per class");
  gen->add_option("--points", gd_points, "Points per cloud");
  gen->add_option("--jitter", gd_jitter, "Gaussian jitter sigma");

  // encode
  std::string en_in, en_out;
  int en_k = 16, en_order = 3;
  bool en_incl0 = false, en_l2 = false;
  CLI::App* enc = app.add_subcommand("encode", "Dump rotation-invariant features for a cloud");
  enc->add_option("--in", en_in, "Input cloud (.xyz or .off)")->required();
  enc->add_option("--k", en_k, "kNN graph size");
  enc->add_option("--order", en_order, "Filter order K");
  enc->add_flag("--include-order0", en_incl0, "Prepend the order-0 channel");
  enc->add_flag("--l2-normalize", en_l2, "Scale the table to unit Frobenius norm");
  enc->add_option("--out", en_out, "Output table path")->required();

  // coarsen
  std::string co_in, co_method = "ti";
  int co_k = 16, co_keep = 0, co_m = 8;
  CLI::App* coa = app.add_subcommand("coarsen", "Print kept indices for a coarsening method");
  coa->add_option("--in", co_in, "Input cloud")->required();
  coa->add_option("--k", co_k, "kNN graph size (ti method)");
  coa->add_option("--keep", co_keep, "Number of points to keep")->required();
  coa->add_option("--m", co_m, "Cluster size (ti method)");
  coa->add_option("--method", co_method, "ti | uniform | fps");

  // train
  std::string tr_manifest, tr_val, tr_config, tr_ckpt, tr_metrics, tr_rotation = "none";
  TrainConfig tr_tc;
  CLI::App* tra = app.add_subcommand("train", "Train a classifier from a manifest");
  tra->add_option("--manifest", tr_manifest, "Training manifest")->required();
  tra->add_option("--val-manifest", tr_val, "Held-out manifest");
  tra->add_option("--config", tr_config, "Model config file (key=value lines)");
  tra->add_option("--ckpt", tr_ckpt, "Checkpoint output path");
  tra->add_option("--metrics", tr_metrics, "Also write the metrics CSV here");
  tra->add_option("--epochs", tr_tc.epochs, "Epoch count");
  tra->add_option("--batch", tr_tc.batch_size, "Batch size");
  tra->add_option("--lr", tr_tc.lr, "Learning rate");
  tra->add_option("--momentum", tr_tc.momentum, "Momentum");
  tra->add_option("--rotation", tr_rotation, "Training augmentation: none | z | so3");
  bool tr_no_weights = false;
  tra->add_flag("--no-class-weights", tr_no_weights, "Disable inverse-frequency loss weights");

  // eval
  std::string ev_manifest, ev_ckpt, ev_mode = "none";
  CLI::App* eva = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eva->add_option("--manifest", ev_manifest, "Evaluation manifest")->required();
  eva->add_option("--ckpt", ev_ckpt, "Checkpoint path")->required();
  eva->add_option("--mode", ev_mode, "Test-time rotation: none | z | so3");

  // rotate-test
  std::string rt_manifest, rt_test, rt_config;
  TrainConfig rt_tc;
  CLI::App* rot = app.add_subcommand(
      "rotate-test", "Train with z rotations, evaluate under none/z/so3");
  rot->add_option("--manifest", rt_manifest, "Training manifest")->required();
  rot->add_option("--test-manifest", rt_test, "Test manifest")->required();
  rot->add_option("--config", rt_config, "Model config file");
  rot->add_option("--epochs", rt_tc.epochs, "Epoch count");
  rot->add_option("--batch", rt_tc.batch_size, "Batch size");
  rot->add_option("--lr", rt_tc.lr, "Learning rate");
  rot->add_option("--momentum", rt_tc.momentum, "Momentum");

  // bench
  std::string be_points = "1024", be_k = "16";
  int be_repeat = 3;
  CLI::App* ben = app.add_subcommand("bench", "Time graph build, TI encode, and forward");
  ben->add_option("--points", be_points, "Comma-separated cloud sizes");
  ben->add_option("--k", be_k, "Comma-separated kNN sizes");
  ben->add_option("--repeat", be_repeat, "Repeats per cell (median reported)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    set_max_threads(g.threads);
    if (gen->parsed())
      return run_gen_data(g, gd_out, gd_classes, gd_per_class, gd_points, gd_jitter);
    if (enc->parsed()) return run_encode(en_in, en_k, en_order, en_incl0, en_l2, en_out);
    if (coa->parsed()) return run_coarsen(g, co_in, co_k, co_keep, co_m, co_method);
    if (tra->parsed()) {
      tr_tc.class_weighting = !tr_no_weights;
      return run_train(g, tr_manifest, tr_val, tr_config, tr_ckpt, tr_metrics, tr_tc,
                       tr_rotation);
    }
    if (eva->parsed()) return run_eval(g, ev_manifest, ev_ckpt, ev_mode);
    if (rot->parsed()) return run_rotate_test(g, rt_manifest, rt_test, rt_config, rt_tc);
    if (ben->parsed()) return run_bench(g, be_points, be_k, be_repeat);
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
