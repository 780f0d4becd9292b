#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "itsr/environment.hpp"
#include "itsr/nn/network.hpp"
#include "itsr/training.hpp"

namespace itsr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvSpec {
  std::string kind = "toy-constrained";  // toy-constrained | toy-free | image
  int grid_size = 3;
  int shape_count = 3;
  int cell_pixels = 9;
  int image_side = 32;
  int max_len = 10;
  int max_repeats = 2;
  std::string pool_dir;  // empty: procedural fixture pool
  int pool_size = 64;
  std::uint64_t pool_seed = 1;
};

struct NetworkSpec {
  std::string backbone = "auto";  // auto | lenet5 | small_cnn
  int reduction_width = 128;
  double learning_rate = 0.001;
  double momentum = 0.8;
};

struct EvalSpec {
  std::vector<int> ks = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int test_pairs = 1000;
  int max_len = 0;    // 0: environment maximum
  int max_depth = 0;  // 0: environment maximum
};

/// Everything a run needs. Defaults are the standard training hyperparameters.
struct RunConfig {
  EnvSpec env;
  NetworkSpec network;
  TrainingConfig training;
  EvalSpec eval;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Parses a JSON document over the defaults. Unknown keys and wrong types raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& doc, const std::string& assignment);

std::unique_ptr<Environment> make_environment(const EnvSpec& spec);
nn::NetworkConfig make_network_config(const RunConfig& cfg, const Environment& env, nn::HeadKind head);

}  // namespace itsr
