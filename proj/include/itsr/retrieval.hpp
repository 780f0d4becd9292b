#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itsr/environment.hpp"
#include "itsr/model.hpp"

namespace itsr {

struct RetrievalResult {
  Trajectory trajectory;
  bool success = false;
  int expansions = 0;
  /// log(cumulative probability) of every materialised node, in expansion order.
  std::vector<double> expanded_log_scores;
};

/// One greedy depth-first trajectory over the actor's masked argmax. Stops at the
/// goal or at max_depth. Successes are re-verified by replaying the trajectory.
RetrievalResult single_shot(const StatePair& pair, const PolicyModel& model, const Environment& env, int max_depth);

/// Best-first expansion tree. A candidate edge scores the product of actor
/// probabilities along its prefix; each materialised node costs one expansion and
/// the search stops at the goal or after `k` expansions.
RetrievalResult top_k_search(const StatePair& pair, const PolicyModel& model, const Environment& env, int k,
                             int max_depth);

struct EpisodeRecord {
  std::size_t index = 0;
  std::size_t ground_truth_length = 0;
  bool single_shot_success = false;
  Trajectory single_shot_trajectory;
  /// Expansions the best-first search needed, or -1 if it failed within max(K).
  int top_k_expansions = -1;
  Trajectory top_k_trajectory;
};

struct EvalReport {
  double single_shot_accuracy = 0.0;
  std::map<int, double> top_k_accuracy;
  double mean_expansions = 0.0;  // over best-first successes
  /// Share of single-shot trajectories that apply invert twice in a row; set only
  /// when the environment has an invert action.
  std::optional<double> consecutive_inversion_rate;
  std::vector<EpisodeRecord> episodes;
};

std::vector<int> default_ks();

/// Both metrics over a test set. Best-first search is deterministic and prefix-stable
/// in its budget, so one run at max(K) decides success for every smaller K.
EvalReport evaluate(const PolicyModel& model, const Environment& env, const std::vector<Episode>& test_set,
                    const std::vector<int>& ks, int max_depth, int workers = 1);

/// aggregate.csv (model,env,metric,K,value), episodes.jsonl and topk_plot.csv.
void write_eval_outputs(const EvalReport& report, const Environment& env, const std::string& model_name,
                        const std::filesystem::path& dir);

}  // namespace itsr
