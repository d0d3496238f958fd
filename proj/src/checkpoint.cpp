// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <sstream>
#include <string>

#include "tinet/errors.hpp"
#include "tinet/model.hpp"
#include "tinet/util.hpp"

namespace tinet {

namespace {

constexpr const char* kCkptHeader = "3DTI-CKPT v1";

} // namespace

void save_checkpoint(const Model& m, const std::string& path, int epoch, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path);
  out << kCkptHeader << '\n';
  out << serialize_model_config(m.cfg) << " ckpt_epoch=" << epoch << " ckpt_seed=" << seed
      << '\n';
  for (const CTensorRef& t : model_tensors(m)) {
    out << t.name << ' ' << t.data->rows() << ' ' << t.data->cols() << '\n';
    for (long r = 0; r < t.data->rows(); ++r) {
      for (long c = 0; c < t.data->cols(); ++c) {
        if (c) out << ' ';
        out << fmt_g17((*t.data)(r, c));
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("write failure on checkpoint " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path);

  std::string header;
  if (!std::getline(in, header) || header != kCkptHeader)
    throw DataError("checkpoint version mismatch in " + path + " (expected \"" +
                    std::string(kCkptHeader) + "\")");

  std::string config_line;
  if (!std::getline(in, config_line)) throw DataError("truncated checkpoint " + path);

  LoadedCheckpoint loaded;
  {
    std::istringstream iss(config_line);
    std::string token;
    while (iss >> token) {
      const size_t eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      long v = 0;
      if (key == "ckpt_epoch" && parse_long(value, v)) loaded.epoch = static_cast<int>(v);
      if (key == "ckpt_seed" && parse_long(value, v))
        loaded.seed = static_cast<std::uint64_t>(v);
    }
  }
  const ModelConfig cfg = parse_model_config(config_line);
  loaded.model = init_model(cfg, 0);

  for (const TensorRef& t : model_tensors(loaded.model)) {
    std::string name;
    long rows = 0;
    long cols = 0;
    if (!(in >> name >> rows >> cols))
      throw DataError("truncated checkpoint " + path + " (expected tensor " + t.name + ")");
    if (name != t.name || rows != t.data->rows() || cols != t.data->cols())
      throw DataError("checkpoint shape mismatch at tensor " + t.name + ": file has " + name +
                      " " + std::to_string(rows) + "x" + std::to_string(cols) + ", config needs " +
                      std::to_string(t.data->rows()) + "x" + std::to_string(t.data->cols()));
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c)
        if (!(in >> (*t.data)(r, c)))
          throw DataError("truncated checkpoint " + path + " in tensor " + t.name);
  }
  std::string trailing;
  if (in >> trailing) throw DataError("trailing data in checkpoint " + path);
  return loaded;
}

} // namespace tinet
