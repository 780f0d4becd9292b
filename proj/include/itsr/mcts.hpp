#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "itsr/environment.hpp"
#include "itsr/model.hpp"
#include "itsr/replay.hpp"

namespace itsr {

struct MctsConfig {
  int iterations = 100;  // simulations per move
  double c_puct = 1.0;
  double dirichlet_alpha = 5.0;
  double noise_weight = 0.25;  // epsilon
  double temperature = 1.0;    // tau
  int max_depth = 18;

  void validate() const;
};

class TerminalRoot : public std::runtime_error {
 public:
  TerminalRoot() : std::runtime_error("search root is terminal") {}
};

struct SearchNode;

/// Statistics for one legal action out of a node.
struct Edge {
  int action = 0;
  double prior = 0.0;
  int visits = 0;
  double total_value = 0.0;
  std::unique_ptr<SearchNode> child;

  double mean_value() const { return visits > 0 ? total_value / visits : 0.0; }
};

struct SearchNode {
  State state;
  int depth = 0;
  int visits = 0;
  bool expanded = false;
  bool terminal = false;
  double terminal_value = 0.0;
  double network_value = 0.0;
  std::vector<Edge> edges;  // legal actions in ascending id order

  int edge_visits() const;
};

/// Creates a node and resolves its terminal status (+1 on goal, -1 when depth
/// reaches max_depth or no action is legal).
std::unique_ptr<SearchNode> make_node(const Environment& env, State state, int depth, const Image& target,
                                      int max_depth);

/// Evaluates the node, creates one edge per legal action with the network prior,
/// and returns the critic value.
double expand(SearchNode& node, const Environment& env, PairEvaluator& evaluator);

/// p(1 - eps) + eps d with d ~ Dir(alpha) over the legal entries; illegal entries stay 0.
Eigen::VectorXd add_dirichlet_noise(const Eigen::VectorXd& priors, const ActionMask& legal, double alpha,
                                    double epsilon, Rng& rng);
void add_root_noise(SearchNode& root, double alpha, double epsilon, Rng& rng);

/// Index into node.edges maximising Q + c P sqrt(sum N + 1) / (1 + N); the lowest
/// action id wins ties.
std::size_t select_edge(const SearchNode& node, double c_puct);
int select_child(const SearchNode& node, double c_puct);

/// One selection/expansion/backup pass. Every traversed edge gets N += 1 and
/// W += v with no sign flip.
void run_simulation(SearchNode& root, const Environment& env, PairEvaluator& evaluator, const Image& target,
                    const MctsConfig& cfg);

/// pi(a) proportional to N(a)^(1/tau); tau < 0.01 gives the one-hot argmax.
Eigen::VectorXd policy_target(const SearchNode& root, int action_count, double tau);

struct MoveTrace {
  int depth = 0;
  std::vector<int> actions;
  std::vector<double> priors;
  std::vector<int> visits;
  double value = 0.0;
  int chosen = -1;
};

struct SelfPlayResult {
  std::vector<ReplayItem> items;
  Trajectory played;
  bool success = false;
  std::vector<MoveTrace> trace;  // filled only when requested
};

/// Plays one episode from the source: root noise, `iterations` simulations, record
/// (state, pi), sample a move from pi. Every item's value target is the final
/// outcome (+1 success, -1 failure).
SelfPlayResult self_play_episode(const Episode& episode, const PolicyModel& model, const Environment& env,
                                 const MctsConfig& cfg, Rng& rng, bool record_trace = false);

}  // namespace itsr
