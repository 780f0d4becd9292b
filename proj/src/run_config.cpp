#include "itsr/run_config.hpp"

#include <fstream>
#include <set>

#include "itsr/image_env.hpp"
#include "itsr/toy_env.hpp"

namespace itsr {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!keys.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_int(const json& j, const char* key, int& out, const std::string& where) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  out = j.at(key).get<int>();
}

}  // namespace

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  check_keys(j, "config", {"env", "network", "mcts", "training", "eval", "seed", "workers"});
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  read_int(j, "workers", cfg.workers, "config");

  if (j.contains("env")) {
    const auto& e = j["env"];
    check_keys(e, "env", {"kind", "grid_size", "shape_count", "cell_pixels", "image_side", "max_len", "max_repeats",
                          "pool_dir", "pool_size", "pool_seed"});
    read(e, "kind", cfg.env.kind, "env");
    read_int(e, "grid_size", cfg.env.grid_size, "env");
    read_int(e, "shape_count", cfg.env.shape_count, "env");
    read_int(e, "cell_pixels", cfg.env.cell_pixels, "env");
    read_int(e, "image_side", cfg.env.image_side, "env");
    read_int(e, "max_len", cfg.env.max_len, "env");
    read_int(e, "max_repeats", cfg.env.max_repeats, "env");
    read(e, "pool_dir", cfg.env.pool_dir, "env");
    read_int(e, "pool_size", cfg.env.pool_size, "env");
    read(e, "pool_seed", cfg.env.pool_seed, "env");
  }
  if (j.contains("network")) {
    const auto& n = j["network"];
    check_keys(n, "network", {"backbone", "reduction_width", "learning_rate", "momentum"});
    read(n, "backbone", cfg.network.backbone, "network");
    read_int(n, "reduction_width", cfg.network.reduction_width, "network");
    read(n, "learning_rate", cfg.network.learning_rate, "network");
    read(n, "momentum", cfg.network.momentum, "network");
  }
  if (j.contains("mcts")) {
    const auto& m = j["mcts"];
    check_keys(m, "mcts", {"iterations", "c_puct", "dirichlet_alpha", "noise_weight", "temperature"});
    read_int(m, "iterations", cfg.training.mcts.iterations, "mcts");
    read(m, "c_puct", cfg.training.mcts.c_puct, "mcts");
    read(m, "dirichlet_alpha", cfg.training.mcts.dirichlet_alpha, "mcts");
    read(m, "noise_weight", cfg.training.mcts.noise_weight, "mcts");
    read(m, "temperature", cfg.training.mcts.temperature, "mcts");
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    check_keys(t, "training", {"curriculum", "trajectories_per_epoch", "batches_per_epoch", "batch_size",
                               "buffer_capacity", "abort_on_zero_success"});
    if (t.contains("curriculum")) {
      if (!t["curriculum"].is_array()) throw ConfigError("training.curriculum must be an array");
      cfg.training.curriculum.clear();
      for (const auto& s : t["curriculum"]) {
        check_keys(s, "training.curriculum[]", {"epochs", "max_len"});
        CurriculumStage stage;
        read_int(s, "epochs", stage.epochs, "training.curriculum[]");
        read_int(s, "max_len", stage.max_len, "training.curriculum[]");
        cfg.training.curriculum.push_back(stage);
      }
    }
    read_int(t, "trajectories_per_epoch", cfg.training.trajectories_per_epoch, "training");
    read_int(t, "batches_per_epoch", cfg.training.batches_per_epoch, "training");
    read_int(t, "batch_size", cfg.training.batch_size, "training");
    read(t, "buffer_capacity", cfg.training.buffer_capacity, "training");
    read(t, "abort_on_zero_success", cfg.training.abort_on_zero_success, "training");
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    check_keys(e, "eval", {"ks", "test_pairs", "max_len", "max_depth"});
    read(e, "ks", cfg.eval.ks, "eval");
    read_int(e, "test_pairs", cfg.eval.test_pairs, "eval");
    read_int(e, "max_len", cfg.eval.max_len, "eval");
    read_int(e, "max_depth", cfg.eval.max_depth, "eval");
  }

  static const std::set<std::string> kinds{"toy-constrained", "toy-free", "image"};
  if (!kinds.count(cfg.env.kind)) throw ConfigError("env.kind must be toy-constrained, toy-free or image");
  static const std::set<std::string> backbones{"auto", "lenet5", "small_cnn"};
  if (!backbones.count(cfg.network.backbone)) throw ConfigError("network.backbone must be auto, lenet5 or small_cnn");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  if (cfg.eval.ks.empty()) throw ConfigError("eval.ks must not be empty");
  for (int k : cfg.eval.ks) {
    if (k < 1) throw ConfigError("eval.ks entries must be >= 1");
  }
  if (cfg.eval.test_pairs < 1) throw ConfigError("eval.test_pairs must be >= 1");
  if (cfg.network.reduction_width < 1) throw ConfigError("network.reduction_width must be >= 1");
  cfg.training.seed = cfg.seed;
  cfg.training.workers = cfg.workers;
  try {
    cfg.training.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  json curriculum = json::array();
  for (const auto& s : cfg.training.curriculum) curriculum.push_back({{"epochs", s.epochs}, {"max_len", s.max_len}});
  return {
      {"seed", cfg.seed},
      {"workers", cfg.workers},
      {"env",
       {{"kind", cfg.env.kind},
        {"grid_size", cfg.env.grid_size},
        {"shape_count", cfg.env.shape_count},
        {"cell_pixels", cfg.env.cell_pixels},
        {"image_side", cfg.env.image_side},
        {"max_len", cfg.env.max_len},
        {"max_repeats", cfg.env.max_repeats},
        {"pool_dir", cfg.env.pool_dir},
        {"pool_size", cfg.env.pool_size},
        {"pool_seed", cfg.env.pool_seed}}},
      {"network",
       {{"backbone", cfg.network.backbone},
        {"reduction_width", cfg.network.reduction_width},
        {"learning_rate", cfg.network.learning_rate},
        {"momentum", cfg.network.momentum}}},
      {"mcts",
       {{"iterations", cfg.training.mcts.iterations},
        {"c_puct", cfg.training.mcts.c_puct},
        {"dirichlet_alpha", cfg.training.mcts.dirichlet_alpha},
        {"noise_weight", cfg.training.mcts.noise_weight},
        {"temperature", cfg.training.mcts.temperature}}},
      {"training",
       {{"curriculum", curriculum},
        {"trajectories_per_epoch", cfg.training.trajectories_per_epoch},
        {"batches_per_epoch", cfg.training.batches_per_epoch},
        {"batch_size", cfg.training.batch_size},
        {"buffer_capacity", cfg.training.buffer_capacity},
        {"abort_on_zero_success", cfg.training.abort_on_zero_success}}},
      {"eval",
       {{"ks", cfg.eval.ks},
        {"test_pairs", cfg.eval.test_pairs},
        {"max_len", cfg.eval.max_len},
        {"max_depth", cfg.eval.max_depth}}},
  };
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("empty key in override " + assignment);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    if (!node->is_object() && !node->is_null()) throw ConfigError("override path crosses a non-object: " + path);
    start = dot + 1;
  }
}

std::unique_ptr<Environment> make_environment(const EnvSpec& spec) {
  try {
    if (spec.kind == "image") {
      ImageEnvConfig cfg;
      cfg.image_side = spec.image_side;
      cfg.max_len = spec.max_len;
      cfg.max_repeats_per_transform = spec.max_repeats;
      auto pool = spec.pool_dir.empty() ? make_fixture_pool(spec.pool_size, spec.image_side, spec.pool_seed)
                                        : load_pgm_directory(spec.pool_dir);
      if (pool.empty()) throw ConfigError("image source pool is empty");
      return std::make_unique<ImageEnvironment>(cfg, std::move(pool));
    }
    ToyConfig cfg;
    cfg.grid_size = spec.grid_size;
    cfg.shape_count = spec.shape_count;
    cfg.cell_pixels = spec.cell_pixels;
    cfg.variant = spec.kind == "toy-free" ? ToyVariant::Free : ToyVariant::Constrained;
    return std::make_unique<ToyEnvironment>(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

nn::NetworkConfig make_network_config(const RunConfig& cfg, const Environment& env, nn::HeadKind head) {
  std::string backbone = cfg.network.backbone;
  if (backbone == "auto") backbone = env.kind() == "image" ? "small_cnn" : "lenet5";
  nn::NetworkConfig net = backbone == "lenet5" ? nn::lenet5_config(env.image_side(), env.action_count(), head)
                                               : nn::small_cnn_config(env.image_side(), env.action_count(), head);
  net.reduction_width = cfg.network.reduction_width;
  net.learning_rate = cfg.network.learning_rate;
  net.momentum = cfg.network.momentum;
  return net;
}

}  // namespace itsr
