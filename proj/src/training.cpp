#include "itsr/training.hpp"

#include <chrono>
#include <numeric>
#include <sstream>

#include "itsr/model.hpp"
#include "itsr/parallel.hpp"
#include "itsr/retrieval.hpp"

namespace itsr {

std::vector<const ReplayItem*> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng) {
  if (buffer.empty()) throw EmptyBuffer();
  std::vector<const ReplayItem*> batch;
  batch.reserve(batch_size);
  for (auto i : sample_indices(buffer.size(), batch_size, rng)) batch.push_back(&buffer[i]);
  return batch;
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t batch_size, Rng& rng) {
  if (population == 0) throw EmptyBuffer();
  std::vector<std::size_t> out;
  out.reserve(batch_size);
  if (population < batch_size) {
    std::uniform_int_distribution<std::size_t> pick(0, population - 1);
    for (std::size_t i = 0; i < batch_size; ++i) out.push_back(pick(rng));
    return out;
  }
  // Partial Fisher-Yates.
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(idx[i], idx[pick(rng)]);
    out.push_back(idx[i]);
  }
  return out;
}

std::vector<CurriculumStage> default_curriculum() { return {{5, 4}, {30, 8}, {50, 0}}; }

int effective_max_len(const CurriculumStage& stage, const Environment& env) {
  return stage.max_len > 0 ? std::min(stage.max_len, env.max_depth()) : env.max_depth();
}

void TrainingConfig::validate() const {
  if (curriculum.empty()) throw std::invalid_argument("curriculum must have at least one stage");
  int previous = 0;
  for (const auto& s : curriculum) {
    if (s.epochs < 1) throw std::invalid_argument("curriculum stage needs at least one epoch");
    const int len = s.max_len > 0 ? s.max_len : std::numeric_limits<int>::max();
    if (len < previous) throw std::invalid_argument("curriculum max lengths must be non-decreasing");
    previous = len;
  }
  if (trajectories_per_epoch < 1) throw std::invalid_argument("trajectories_per_epoch must be >= 1");
  if (batches_per_epoch < 0) throw std::invalid_argument("batches_per_epoch must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  mcts.validate();
}

std::vector<Episode> generate_episodes(const Environment& env, int count, int max_len, std::uint64_t seed,
                                       int global_epoch, int workers) {
  std::vector<Episode> episodes(static_cast<std::size_t>(count));
  parallel_for(episodes.size(), workers, [&](std::size_t i) {
    Rng rng(derive_seed(seed, "episode", {static_cast<std::uint64_t>(global_epoch), i}));
    episodes[i] = env.generate_pair(max_len, rng);
  });
  return episodes;
}

std::vector<Episode> generate_test_set(const Environment& env, int count, int max_len, std::uint64_t seed) {
  std::vector<Episode> episodes;
  episodes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "test", {static_cast<std::uint64_t>(i)}));
    episodes.push_back(env.generate_pair(max_len, rng));
  }
  return episodes;
}

std::vector<ReplayItem> supervised_samples(const Environment& env, const Episode& episode) {
  std::vector<ReplayItem> items;
  State state = episode.source;
  for (int action : episode.ground_truth) {
    Eigen::VectorXd label = Eigen::VectorXd::Zero(env.action_count());
    label(action) = 1.0;
    items.push_back(ReplayItem{StatePair{state, episode.target}, env.legal_mask(state), std::move(label), 0.0});
    state = env.apply(action, state);
  }
  return items;
}

namespace {

using Clock = std::chrono::steady_clock;

// Collects one epoch's fresh replay items and its success rate.
struct EpochData {
  std::vector<ReplayItem> items;
  double success_rate = 0.0;
};

using EpochProducer = std::function<EpochData(const std::vector<Episode>&, int max_len, int global_epoch)>;

std::vector<EpochMetrics> run_curriculum(const Environment& env, nn::PolicyValueNet<float>& net,
                                         const TrainingConfig& cfg, const EpochCallback& on_epoch, int first_epoch,
                                         const EpochProducer& produce) {
  cfg.validate();
  ReplayBuffer buffer(cfg.buffer_capacity);
  std::vector<EpochMetrics> history;
  int global_epoch = 0;
  for (std::size_t s = 0; s < cfg.curriculum.size(); ++s) {
    const auto& stage = cfg.curriculum[s];
    const int max_len = effective_max_len(stage, env);
    bool any_success = false;
    bool ran_any = false;
    for (int e = 0; e < stage.epochs; ++e, ++global_epoch) {
      if (global_epoch < first_epoch) continue;
      ran_any = true;
      const auto start = Clock::now();
      const auto episodes =
          generate_episodes(env, cfg.trajectories_per_epoch, max_len, cfg.seed, global_epoch, cfg.workers);
      EpochData data = produce(episodes, max_len, global_epoch);
      any_success = any_success || data.success_rate > 0.0;

      EpochMetrics m;
      m.stage = static_cast<int>(s);
      m.epoch = e;
      m.global_epoch = global_epoch;
      m.max_len = max_len;
      m.success_rate = data.success_rate;
      m.new_samples = data.items.size();
      for (auto& item : data.items) buffer.push(std::move(item));
      m.buffer_size = buffer.size();

      Rng batch_rng(derive_seed(cfg.seed, "batch", {static_cast<std::uint64_t>(global_epoch)}));
      for (int b = 0; b < cfg.batches_per_epoch; ++b) {
        const auto batch = sample_batch(buffer, static_cast<std::size_t>(cfg.batch_size), batch_rng);
        const auto loss = net.train_step(batch);
        m.policy_ce += loss.policy_ce;
        m.value_mse += loss.value_mse;
        m.total_loss += loss.total;
      }
      if (cfg.batches_per_epoch > 0) {
        m.policy_ce /= cfg.batches_per_epoch;
        m.value_mse /= cfg.batches_per_epoch;
        m.total_loss /= cfg.batches_per_epoch;
      }
      m.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
      history.push_back(m);
      if (on_epoch) on_epoch(m, net);
    }
    if (cfg.abort_on_zero_success && ran_any && !any_success) {
      std::ostringstream msg;
      msg << "success rate stayed 0 for all of curriculum stage " << s << " (max_len " << max_len << ", "
          << stage.epochs << " epochs); check the curriculum and search budget";
      throw TrainingAborted(msg.str());
    }
  }
  return history;
}

}  // namespace

std::vector<EpochMetrics> train_mcts(const Environment& env, nn::PolicyValueNet<float>& net, const TrainingConfig& cfg,
                                     const EpochCallback& on_epoch, int first_epoch) {
  auto produce = [&](const std::vector<Episode>& episodes, int max_len, int global_epoch) {
    MctsConfig mcts = cfg.mcts;
    mcts.max_depth = max_len;
    const NetworkModel model(net);
    std::vector<SelfPlayResult> results(episodes.size());
    parallel_for(episodes.size(), cfg.workers, [&](std::size_t i) {
      Rng rng(derive_seed(cfg.seed, "selfplay", {static_cast<std::uint64_t>(global_epoch), i}));
      results[i] = self_play_episode(episodes[i], model, env, mcts, rng);
    });
    EpochData data;
    int successes = 0;
    for (auto& r : results) {
      successes += r.success;
      for (auto& item : r.items) data.items.push_back(std::move(item));
    }
    data.success_rate = static_cast<double>(successes) / static_cast<double>(episodes.size());
    return data;
  };
  return run_curriculum(env, net, cfg, on_epoch, first_epoch, produce);
}

std::vector<EpochMetrics> train_supervised(const Environment& env, nn::PolicyValueNet<float>& net,
                                           const TrainingConfig& cfg, const EpochCallback& on_epoch,
                                           int first_epoch) {
  auto produce = [&](const std::vector<Episode>& episodes, int max_len, int) {
    const NetworkModel model(net);
    std::vector<char> solved(episodes.size(), 0);
    parallel_for(episodes.size(), cfg.workers, [&](std::size_t i) {
      solved[i] = single_shot({episodes[i].source, episodes[i].target}, model, env, max_len).success;
    });
    EpochData data;
    for (const auto& ep : episodes) {
      for (auto& item : supervised_samples(env, ep)) data.items.push_back(std::move(item));
    }
    data.success_rate = static_cast<double>(std::count(solved.begin(), solved.end(), 1)) /
                        static_cast<double>(episodes.size());
    return data;
  };
  return run_curriculum(env, net, cfg, on_epoch, first_epoch, produce);
}

}  // namespace itsr
