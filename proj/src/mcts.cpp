#include "itsr/mcts.hpp"

#include <cmath>
#include <random>

namespace itsr {

void MctsConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("mcts iterations must be >= 1");
  if (noise_weight < 0.0 || noise_weight > 1.0) throw std::invalid_argument("mcts noise_weight must be in [0, 1]");
  if (!(temperature > 0.0)) throw std::invalid_argument("mcts temperature must be > 0");
  if (!(dirichlet_alpha > 0.0)) throw std::invalid_argument("dirichlet alpha must be > 0");
  if (max_depth < 1) throw std::invalid_argument("mcts max_depth must be >= 1");
}

int SearchNode::edge_visits() const {
  int total = 0;
  for (const auto& e : edges) total += e.visits;
  return total;
}

std::unique_ptr<SearchNode> make_node(const Environment& env, State state, int depth, const Image& target,
                                      int max_depth) {
  auto node = std::make_unique<SearchNode>();
  node->depth = depth;
  if (is_goal(state.image, target)) {
    node->terminal = true;
    node->terminal_value = 1.0;
  } else if (depth >= max_depth || !env.legal_mask(state).any()) {
    node->terminal = true;
    node->terminal_value = -1.0;
  }
  node->state = std::move(state);
  return node;
}

double expand(SearchNode& node, const Environment& env, PairEvaluator& evaluator) {
  const ActionMask legal = env.legal_mask(node.state);
  const NetworkOutput out = evaluator.evaluate(node.state, legal);
  node.edges.clear();
  for (int a = 0; a < legal.size(); ++a) {
    if (!legal(a)) continue;
    Edge e;
    e.action = a;
    e.prior = out.policy(a);
    node.edges.push_back(std::move(e));
  }
  node.expanded = true;
  node.network_value = out.value;
  return out.value;
}

Eigen::VectorXd add_dirichlet_noise(const Eigen::VectorXd& priors, const ActionMask& legal, double alpha,
                                    double epsilon, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(priors.size());
  for (Eigen::Index a = 0; a < priors.size(); ++a)
    if (legal(a)) noise(a) = gamma(rng);
  const double total = noise.sum();
  if (total > 0) noise /= total;
  Eigen::VectorXd out = priors * (1.0 - epsilon) + epsilon * noise;
  for (Eigen::Index a = 0; a < out.size(); ++a)
    if (!legal(a)) out(a) = 0.0;
  return out;
}

void add_root_noise(SearchNode& root, double alpha, double epsilon, Rng& rng) {
  if (root.edges.empty()) return;
  const auto n = static_cast<Eigen::Index>(root.edges.size());
  Eigen::VectorXd priors(n);
  for (Eigen::Index i = 0; i < n; ++i) priors(i) = root.edges[static_cast<std::size_t>(i)].prior;
  const Eigen::VectorXd noisy = add_dirichlet_noise(priors, ActionMask::Constant(n, true), alpha, epsilon, rng);
  for (Eigen::Index i = 0; i < n; ++i) root.edges[static_cast<std::size_t>(i)].prior = noisy(i);
}

std::size_t select_edge(const SearchNode& node, double c_puct) {
  const double scale = c_puct * std::sqrt(static_cast<double>(node.edge_visits()) + 1.0);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < node.edges.size(); ++i) {
    const auto& e = node.edges[i];
    const double score = e.mean_value() + scale * e.prior / (1.0 + e.visits);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

int select_child(const SearchNode& node, double c_puct) { return node.edges[select_edge(node, c_puct)].action; }

void run_simulation(SearchNode& root, const Environment& env, PairEvaluator& evaluator, const Image& target,
                    const MctsConfig& cfg) {
  if (root.terminal) throw TerminalRoot();
  if (!root.expanded) expand(root, env, evaluator);

  std::vector<SearchNode*> nodes{&root};
  std::vector<Edge*> path;
  SearchNode* node = &root;
  while (node->expanded && !node->terminal) {
    Edge& e = node->edges[select_edge(*node, cfg.c_puct)];
    if (!e.child) e.child = make_node(env, env.apply(e.action, node->state), node->depth + 1, target, cfg.max_depth);
    path.push_back(&e);
    node = e.child.get();
    nodes.push_back(node);
  }
  const double value = node->terminal ? node->terminal_value : expand(*node, env, evaluator);
  for (Edge* e : path) {
    e->visits += 1;
    e->total_value += value;
  }
  for (SearchNode* n : nodes) n->visits += 1;
}

Eigen::VectorXd policy_target(const SearchNode& root, int action_count, double tau) {
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(action_count);
  if (root.edge_visits() == 0) throw std::invalid_argument("policy target needs at least one visit");
  if (tau < 0.01) {
    int best_visits = -1;
    int best = 0;
    for (const auto& e : root.edges) {
      if (e.visits > best_visits) {
        best_visits = e.visits;
        best = e.action;
      }
    }
    pi(best) = 1.0;
    return pi;
  }
  int max_visits = 0;
  for (const auto& e : root.edges) max_visits = std::max(max_visits, e.visits);
  for (const auto& e : root.edges) {
    if (e.visits > 0) pi(e.action) = std::pow(static_cast<double>(e.visits) / max_visits, 1.0 / tau);
  }
  return pi / pi.sum();
}

SelfPlayResult self_play_episode(const Episode& episode, const PolicyModel& model, const Environment& env,
                                 const MctsConfig& cfg, Rng& rng, bool record_trace) {
  cfg.validate();
  SelfPlayResult result;
  auto evaluator = model.bind(episode.target);
  State state = episode.source;
  int depth = 0;
  while (true) {
    if (is_goal(state.image, episode.target)) {
      result.success = true;
      break;
    }
    const ActionMask legal = env.legal_mask(state);
    if (depth >= cfg.max_depth || !legal.any()) break;

    auto root = make_node(env, state, depth, episode.target, cfg.max_depth);
    expand(*root, env, *evaluator);
    add_root_noise(*root, cfg.dirichlet_alpha, cfg.noise_weight, rng);
    for (int k = 0; k < cfg.iterations; ++k) run_simulation(*root, env, *evaluator, episode.target, cfg);

    Eigen::VectorXd pi = policy_target(*root, env.action_count(), cfg.temperature);
    std::discrete_distribution<int> pick(pi.data(), pi.data() + pi.size());
    const int action = pick(rng);

    if (record_trace) {
      MoveTrace t;
      t.depth = depth;
      t.value = root->network_value;
      for (const auto& e : root->edges) {
        t.actions.push_back(e.action);
        t.priors.push_back(e.prior);
        t.visits.push_back(e.visits);
      }
      t.chosen = action;
      result.trace.push_back(std::move(t));
    }
    result.items.push_back(ReplayItem{StatePair{state, episode.target}, legal, std::move(pi), 0.0});
    result.played.push_back(action);
    state = env.apply(action, state);
    ++depth;
  }
  const double z = result.success ? 1.0 : -1.0;
  for (auto& item : result.items) item.value = z;
  return result;
}

}  // namespace itsr
