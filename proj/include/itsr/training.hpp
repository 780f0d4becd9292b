#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "itsr/environment.hpp"
#include "itsr/mcts.hpp"
#include "itsr/nn/network.hpp"
#include "itsr/replay.hpp"

namespace itsr {

/// max_len == 0 means no limit (the environment's own maximum depth).
struct CurriculumStage {
  int epochs = 1;
  int max_len = 0;
};

/// 5, 30 and 50 epochs with ground-truth limits 4, 8 and unlimited.
std::vector<CurriculumStage> default_curriculum();
int effective_max_len(const CurriculumStage& stage, const Environment& env);

struct TrainingConfig {
  std::vector<CurriculumStage> curriculum = default_curriculum();
  int trajectories_per_epoch = 1000;
  int batches_per_epoch = 200;
  int batch_size = 64;
  std::size_t buffer_capacity = 10000;
  MctsConfig mcts;
  std::uint64_t seed = 0;
  int workers = 1;
  bool abort_on_zero_success = true;

  void validate() const;
};

struct EpochMetrics {
  int stage = 0;
  int epoch = 0;         // within the stage
  int global_epoch = 0;  // across stages
  int max_len = 0;
  double policy_ce = 0.0;
  double value_mse = 0.0;
  double total_loss = 0.0;
  double success_rate = 0.0;
  std::size_t new_samples = 0;
  std::size_t buffer_size = 0;
  double wall_seconds = 0.0;
};

class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EpochCallback = std::function<void(const EpochMetrics&, const nn::PolicyValueNet<float>&)>;

/// Episodes for one epoch; episode i uses the seed derived from (seed, "episode", global_epoch, i).
std::vector<Episode> generate_episodes(const Environment& env, int count, int max_len, std::uint64_t seed,
                                       int global_epoch, int workers = 1);

/// Held-out pairs from a seed stream disjoint from every training epoch.
std::vector<Episode> generate_test_set(const Environment& env, int count, int max_len, std::uint64_t seed);

/// One sample per ground-truth step: (state after i steps, target) labelled with action i.
std::vector<ReplayItem> supervised_samples(const Environment& env, const Episode& episode);

/// Curriculum-staged self-play with experience replay. Epochs before `first_epoch`
/// (a global index) are skipped, for resuming.
std::vector<EpochMetrics> train_mcts(const Environment& env, nn::PolicyValueNet<float>& net, const TrainingConfig& cfg,
                                     const EpochCallback& on_epoch = {}, int first_epoch = 0);

/// Next-action classification over the same episode stream, buffer and optimizer.
std::vector<EpochMetrics> train_supervised(const Environment& env, nn::PolicyValueNet<float>& net,
                                           const TrainingConfig& cfg, const EpochCallback& on_epoch = {},
                                           int first_epoch = 0);

}  // namespace itsr
