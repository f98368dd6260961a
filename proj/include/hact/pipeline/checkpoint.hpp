#pragma once

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/gnn/hactnet.hpp"
#include "hact/nn/adam.hpp"
#include "hact/pipeline/standardize.hpp"

namespace hact::pipeline {

/// Model hyperparameters plus the optimisation settings. Feature widths and
/// class count of 0 are filled in from the training data.
struct TrainConfig {
  gnn::HactNetConfig model = default_model();
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool standardize = true;

  static gnn::HactNetConfig default_model() {
    gnn::HactNetConfig m;
    m.num_classes = 0;
    return m;
  }

  void validate() const {
    require(epochs >= 1, Errc::invalid_argument, "epochs must be >= 1");
    require(batch_size >= 1, Errc::invalid_argument, "batch size must be >= 1");
    require(learning_rate >= 0.0, Errc::invalid_argument, "learning rate must be >= 0");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"model", gnn::to_json(c.model)}, {"epochs", c.epochs},   {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate}, {"seed", c.seed}, {"standardize", c.standardize}};
}

/// Keys missing from `j` keep their defaults; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  nlohmann::json full = to_json(TrainConfig{});
  for (const auto& [k, v] : j.items()) {
    require(full.contains(k), Errc::parse_error, "unknown config key '" + k + "'");
    if (k == "model") {
      for (const auto& [mk, mv] : v.items())
        require(full["model"].contains(mk), Errc::parse_error, "unknown model config key '" + mk + "'");
    }
  }
  full.merge_patch(j);
  TrainConfig c;
  try {
    c.model = gnn::config_from_json(full["model"]);
    c.epochs = full["epochs"].get<std::size_t>();
    c.batch_size = full["batch_size"].get<std::size_t>();
    c.learning_rate = full["learning_rate"].get<double>();
    c.seed = full["seed"].get<std::uint64_t>();
    c.standardize = full["standardize"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("bad config: ") + e.what());
  }
  c.validate();
  return c;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path + ": " + e.what());
  }
  return train_config_from_json(j);
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_weighted_f1 = 0.0;
  double val_accuracy = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

/// Everything needed to resume training or to evaluate: weights of the last
/// epoch and of the best-validation epoch, optimiser moments, statistics.
struct Checkpoint {
  TrainConfig config;
  std::vector<std::string> class_names;
  Standardizer stats;
  double cell_delta = 1.0;
  double tissue_delta = 1.0;
  std::size_t epochs_done = 0;
  std::size_t best_epoch = 0;
  double best_val_f1 = -1.0;
  std::vector<EpochRecord> log;
  std::vector<std::string> names;  // parameters, then buffers
  std::vector<Tensor> current, best;
  nn::AdamState adam;
};

/// Parameter values followed by normalisation buffers.
inline std::vector<Tensor> snapshot(gnn::HactNet& net) {
  std::vector<Tensor> out;
  for (const auto& [name, p] : net.parameters()) out.push_back(p->value);
  for (const auto& [name, b] : net.buffers()) out.push_back(*b);
  return out;
}

inline std::vector<std::string> state_names(gnn::HactNet& net) {
  std::vector<std::string> out;
  for (const auto& [name, p] : net.parameters()) out.push_back(name);
  for (const auto& [name, b] : net.buffers()) out.push_back(name);
  return out;
}

inline void restore(gnn::HactNet& net, const std::vector<Tensor>& state) {
  std::vector<Tensor*> dst;
  for (const auto& [name, p] : net.parameters()) dst.push_back(&p->value);
  for (const auto& [name, b] : net.buffers()) dst.push_back(b);
  require(dst.size() == state.size(), Errc::shape_mismatch,
          "checkpoint holds " + std::to_string(state.size()) + " tensors, model has " + std::to_string(dst.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) {
    require(dst[i]->shape() == state[i].shape(), Errc::shape_mismatch,
            "checkpoint tensor " + std::to_string(i) + " has shape " + state[i].shape_string() + ", model expects " +
                dst[i]->shape_string());
    *dst[i] = state[i];
  }
}

/// Rebuilds the network from a checkpoint, with the best or the last weights.
inline gnn::HactNet build_model(const Checkpoint& ck, bool best = true) {
  gnn::HactNet net(ck.config.model, ck.config.seed);
  net.cell_delta = ck.cell_delta;
  net.tissue_delta = ck.tissue_delta;
  restore(net, best ? ck.best : ck.current);
  return net;
}

namespace detail {

inline constexpr char kMagic[8] = {'H', 'A', 'C', 'T', 'C', 'K', 'P', '1'};

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) fail(Errc::parse_error, "truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void put_tensors(std::ostream& out, const std::vector<Tensor>& ts) {
  for (const auto& t : ts)
    for (const double v : t.storage()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline std::vector<Tensor> get_tensors(std::istream& in, const std::vector<std::vector<std::size_t>>& shapes) {
  std::vector<Tensor> out;
  for (const auto& s : shapes) {
    Tensor t(s);
    for (auto& v : t.values()) v = std::bit_cast<double>(get_u64(in));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

inline nlohmann::json header_json(const Checkpoint& ck) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& r : ck.log)
    log.push_back({{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"val_weighted_f1", r.val_weighted_f1},
                   {"val_accuracy", r.val_accuracy}});
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t i = 0; i < ck.current.size(); ++i)
    tensors.push_back({{"name", ck.names.at(i)}, {"shape", ck.current[i].shape()}});
  return {{"config", to_json(ck.config)},
          {"classes", ck.class_names},
          {"standardize", to_json(ck.stats)},
          {"cell_delta", ck.cell_delta},
          {"tissue_delta", ck.tissue_delta},
          {"epochs_done", ck.epochs_done},
          {"best_epoch", ck.best_epoch},
          {"best_val_f1", ck.best_val_f1},
          {"log", log},
          {"tensors", tensors},
          {"adam", {{"lr", ck.adam.lr},
                    {"beta1", ck.adam.beta1},
                    {"beta2", ck.adam.beta2},
                    {"eps", ck.adam.eps},
                    {"step", ck.adam.step},
                    {"moment_tensors", ck.adam.m.size()}}}};
}

/// Binary layout: magic, header length, JSON header, then float64 little-endian
/// blocks for the current weights, best weights, Adam m and Adam v.
inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  require(ck.best.size() == ck.current.size(), Errc::invalid_argument, "checkpoint best/current size differ");
  const std::string header = header_json(ck).dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io_error, "cannot write " + tmp);
    out.write(detail::kMagic, 8);
    detail::put_u64(out, header.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    detail::put_tensors(out, ck.current);
    detail::put_tensors(out, ck.best);
    detail::put_tensors(out, ck.adam.m);
    detail::put_tensors(out, ck.adam.v);
    if (!out) fail(Errc::io_error, "write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, 8);
  require(in && std::equal(magic, magic + 8, detail::kMagic), Errc::parse_error, path + " is not a HACT checkpoint");
  const auto len = detail::get_u64(in);
  require(len < (1u << 30), Errc::parse_error, "implausible checkpoint header length");
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), Errc::parse_error, "truncated checkpoint header");

  Checkpoint ck;
  std::vector<std::vector<std::size_t>> shapes;
  std::size_t moments = 0;
  try {
    const auto j = nlohmann::json::parse(header);
    ck.config = train_config_from_json(j.at("config"));
    ck.class_names = j.at("classes").get<std::vector<std::string>>();
    ck.stats = standardizer_from_json(j.at("standardize"));
    ck.cell_delta = j.at("cell_delta").get<double>();
    ck.tissue_delta = j.at("tissue_delta").get<double>();
    ck.epochs_done = j.at("epochs_done").get<std::size_t>();
    ck.best_epoch = j.at("best_epoch").get<std::size_t>();
    ck.best_val_f1 = j.at("best_val_f1").get<double>();
    for (const auto& r : j.at("log"))
      ck.log.push_back({r.at("epoch").get<std::size_t>(), r.at("train_loss").get<double>(),
                        r.at("val_weighted_f1").get<double>(), r.at("val_accuracy").get<double>()});
    for (const auto& t : j.at("tensors")) {
      ck.names.push_back(t.at("name").get<std::string>());
      shapes.push_back(t.at("shape").get<std::vector<std::size_t>>());
    }
    const auto& a = j.at("adam");
    ck.adam.lr = a.at("lr").get<double>();
    ck.adam.beta1 = a.at("beta1").get<double>();
    ck.adam.beta2 = a.at("beta2").get<double>();
    ck.adam.eps = a.at("eps").get<double>();
    ck.adam.step = a.at("step").get<std::uint64_t>();
    moments = a.at("moment_tensors").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path + ": bad checkpoint header: " + e.what());
  }
  ck.current = detail::get_tensors(in, shapes);
  ck.best = detail::get_tensors(in, shapes);
  require(moments <= shapes.size(), Errc::parse_error, "checkpoint has more moment tensors than tensors");
  // Adam moments cover the parameters, which lead the tensor list.
  const std::vector<std::vector<std::size_t>> pshapes(shapes.begin(), shapes.begin() + static_cast<long>(moments));
  ck.adam.m = detail::get_tensors(in, pshapes);
  ck.adam.v = detail::get_tensors(in, pshapes);
  in.peek();
  require(in.eof(), Errc::parse_error, path + ": trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace hact::pipeline
