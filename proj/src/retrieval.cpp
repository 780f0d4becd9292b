#include "itsr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include <json.hpp>

#include "itsr/parallel.hpp"

namespace itsr {

namespace {

int masked_argmax(const Eigen::VectorXd& policy, const ActionMask& legal) {
  int best = -1;
  for (int a = 0; a < policy.size(); ++a) {
    if (legal(a) && (best < 0 || policy(a) > policy(best))) best = a;
  }
  return best;
}

std::optional<int> find_action(const Environment& env, std::string_view name) {
  for (const auto& a : env.actions()) {
    if (a.name == name) return a.id;
  }
  return std::nullopt;
}

bool repeats(const Trajectory& t, int action) {
  return std::adjacent_find(t.begin(), t.end(), [&](int a, int b) { return a == action && b == action; }) != t.end();
}

void verify(const Environment& env, const StatePair& pair, const RetrievalResult& r) {
  if (r.success && !is_goal(apply_sequence(env, r.trajectory, pair.current).image, pair.target)) {
    throw std::logic_error("retrieved trajectory does not replay to the target");
  }
}

}  // namespace

RetrievalResult single_shot(const StatePair& pair, const PolicyModel& model, const Environment& env, int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  RetrievalResult result;
  auto evaluator = model.bind(pair.target);
  State state = pair.current;
  for (int depth = 0;; ++depth) {
    if (is_goal(state.image, pair.target)) {
      result.success = true;
      break;
    }
    if (depth >= max_depth) break;
    const ActionMask legal = env.legal_mask(state);
    if (!legal.any()) break;
    const int action = masked_argmax(evaluator->evaluate(state, legal).policy, legal);
    state = env.apply(action, state);
    result.trajectory.push_back(action);
    ++result.expansions;
  }
  verify(env, pair, result);
  return result;
}

RetrievalResult top_k_search(const StatePair& pair, const PolicyModel& model, const Environment& env, int k,
                             int max_depth) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  RetrievalResult result;
  if (is_goal(pair.current.image, pair.target)) {
    result.success = true;
    return result;
  }
  auto evaluator = model.bind(pair.target);

  struct TreeNode {
    State state;
    int parent;
    int action;
    int depth;
    double log_prob;
  };
  struct Candidate {
    double log_score;
    std::size_t order;
    int parent;
    int action;
  };
  auto worse = [](const Candidate& a, const Candidate& b) {
    return a.log_score < b.log_score || (a.log_score == b.log_score && a.order > b.order);
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> frontier(worse);
  std::vector<TreeNode> nodes{{pair.current, -1, -1, 0, 0.0}};
  std::size_t order = 0;

  auto push_children = [&](int idx) {
    const auto& node = nodes[static_cast<std::size_t>(idx)];
    const ActionMask legal = env.legal_mask(node.state);
    const Eigen::VectorXd policy = evaluator->evaluate(node.state, legal).policy;
    for (int a = 0; a < policy.size(); ++a) {
      if (legal(a) && policy(a) > 0.0) frontier.push({node.log_prob + std::log(policy(a)), order++, idx, a});
    }
  };

  push_children(0);
  while (result.expansions < k && !frontier.empty()) {
    const Candidate c = frontier.top();
    frontier.pop();
    const auto& parent = nodes[static_cast<std::size_t>(c.parent)];
    nodes.push_back({env.apply(c.action, parent.state), c.parent, c.action, parent.depth + 1, c.log_score});
    ++result.expansions;
    result.expanded_log_scores.push_back(c.log_score);
    const int idx = static_cast<int>(nodes.size()) - 1;
    if (is_goal(nodes.back().state.image, pair.target)) {
      result.success = true;
      for (int i = idx; nodes[static_cast<std::size_t>(i)].parent >= 0; i = nodes[static_cast<std::size_t>(i)].parent) {
        result.trajectory.push_back(nodes[static_cast<std::size_t>(i)].action);
      }
      std::reverse(result.trajectory.begin(), result.trajectory.end());
      break;
    }
    if (nodes.back().depth < max_depth) push_children(idx);
  }
  verify(env, pair, result);
  return result;
}

std::vector<int> default_ks() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

EvalReport evaluate(const PolicyModel& model, const Environment& env, const std::vector<Episode>& test_set,
                    const std::vector<int>& ks, int max_depth, int workers) {
  if (ks.empty()) throw std::invalid_argument("at least one K is required");
  const int k_max = *std::max_element(ks.begin(), ks.end());
  EvalReport report;
  report.episodes.resize(test_set.size());
  parallel_for(test_set.size(), workers, [&](std::size_t i) {
    const auto& ep = test_set[i];
    const StatePair pair{ep.source, ep.target};
    auto& rec = report.episodes[i];
    rec.index = i;
    rec.ground_truth_length = ep.ground_truth.size();
    const auto shot = single_shot(pair, model, env, max_depth);
    rec.single_shot_success = shot.success;
    rec.single_shot_trajectory = shot.trajectory;
    const auto best_first = top_k_search(pair, model, env, k_max, max_depth);
    if (best_first.success) {
      rec.top_k_expansions = best_first.expansions;
      rec.top_k_trajectory = best_first.trajectory;
    }
  });

  const double n = std::max<double>(1.0, static_cast<double>(test_set.size()));
  int shots = 0, solved = 0;
  double expansions = 0;
  for (const auto& rec : report.episodes) {
    shots += rec.single_shot_success;
    if (rec.top_k_expansions >= 0) {
      ++solved;
      expansions += rec.top_k_expansions;
    }
  }
  report.single_shot_accuracy = shots / n;
  if (const auto invert = find_action(env, "invert")) {
    int doubled = 0;
    for (const auto& rec : report.episodes) doubled += repeats(rec.single_shot_trajectory, *invert);
    report.consecutive_inversion_rate = doubled / n;
  }
  report.mean_expansions = solved > 0 ? expansions / solved : 0.0;
  for (int k : ks) {
    int hits = 0;
    for (const auto& rec : report.episodes) hits += rec.top_k_expansions >= 0 && rec.top_k_expansions <= k;
    report.top_k_accuracy[k] = hits / n;
  }
  return report;
}

void write_eval_outputs(const EvalReport& report, const Environment& env, const std::string& model_name,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  auto names = [&](const Trajectory& t) {
    std::vector<std::string> out;
    for (int a : t) out.push_back(env.action_name(a));
    return out;
  };

  auto aggregate = open("aggregate.csv");
  aggregate << "model,env,metric,K,value\n";
  aggregate << model_name << ',' << env.kind() << ",single_shot,," << report.single_shot_accuracy << '\n';
  for (const auto& [k, acc] : report.top_k_accuracy) {
    aggregate << model_name << ',' << env.kind() << ",top_k," << k << ',' << acc << '\n';
  }
  aggregate << model_name << ',' << env.kind() << ",mean_expansions,," << report.mean_expansions << '\n';
  if (report.consecutive_inversion_rate) {
    aggregate << model_name << ',' << env.kind() << ",consecutive_inversions,," << *report.consecutive_inversion_rate
              << '\n';
  }

  auto plot = open("topk_plot.csv");
  plot << "series,K,accuracy\n";
  for (const auto& [k, acc] : report.top_k_accuracy) plot << model_name << ',' << k << ',' << acc << '\n';

  auto jsonl = open("episodes.jsonl");
  for (const auto& rec : report.episodes) {
    nlohmann::json j;
    j["index"] = rec.index;
    j["ground_truth_length"] = rec.ground_truth_length;
    j["single_shot_success"] = rec.single_shot_success;
    j["single_shot_trajectory"] = names(rec.single_shot_trajectory);
    j["top_k_expansions"] = rec.top_k_expansions;
    j["top_k_trajectory"] = names(rec.top_k_trajectory);
    jsonl << j.dump() << '\n';
  }
}

}  // namespace itsr
