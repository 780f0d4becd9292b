#include "itsr/oracle.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <unordered_map>

namespace itsr {

namespace {

void check_budget(const Environment& env, int depth) {
  const double work = std::pow(static_cast<double>(env.action_count()), depth);
  if (work > kEnumerationBudget) {
    throw BudgetExceeded("enumeration of " + std::to_string(env.action_count()) + "^" + std::to_string(depth) +
                         " sequences exceeds the oracle budget");
  }
}

std::string state_key(const State& s) {
  std::string key(reinterpret_cast<const char*>(s.image.data()), static_cast<std::size_t>(s.image.size()));
  key.append(reinterpret_cast<const char*>(s.tags.data()), s.tags.size());
  return key;
}

}  // namespace

std::optional<Trajectory> bfs_solve(const Environment& env, const State& current, const Image& target, int max_depth) {
  check_budget(env, max_depth);
  if (is_goal(current.image, target)) return Trajectory{};

  struct Visit {
    State state;
    int parent;
    int action;
    int depth;
  };
  std::vector<Visit> visits{{current, -1, -1, 0}};
  std::unordered_map<std::string, int> seen{{state_key(current), 0}};
  for (std::size_t head = 0; head < visits.size(); ++head) {
    if (visits[head].depth >= max_depth) continue;
    const ActionMask legal = env.legal_mask(visits[head].state);
    for (int a = 0; a < env.action_count(); ++a) {
      if (!legal(a)) continue;
      State next = env.apply(a, visits[head].state);
      if (!seen.emplace(state_key(next), static_cast<int>(visits.size())).second) continue;
      const bool goal = is_goal(next.image, target);
      visits.push_back({std::move(next), static_cast<int>(head), a, visits[head].depth + 1});
      if (goal) {
        Trajectory t;
        for (int i = static_cast<int>(visits.size()) - 1; visits[static_cast<std::size_t>(i)].parent >= 0;
             i = visits[static_cast<std::size_t>(i)].parent) {
          t.push_back(visits[static_cast<std::size_t>(i)].action);
        }
        return Trajectory(t.rbegin(), t.rend());
      }
    }
  }
  return std::nullopt;
}

std::uint64_t count_sequences(int alphabet, int cap, int min_len, int max_len) {
  if (alphabet < 1 || cap < 0 || min_len < 0 || max_len < min_len) throw std::invalid_argument("bad sequence grammar");
  // Usage vectors encoded in base (cap + 1).
  const int base = cap + 1;
  std::size_t states = 1;
  for (int i = 0; i < alphabet; ++i) states *= static_cast<std::size_t>(base);
  std::vector<std::uint64_t> ways(states, 0), next(states, 0);
  ways[0] = 1;
  std::uint64_t total = min_len == 0 ? 1 : 0;
  for (int len = 1; len <= max_len; ++len) {
    std::fill(next.begin(), next.end(), 0);
    for (std::size_t s = 0; s < states; ++s) {
      if (ways[s] == 0) continue;
      std::size_t stride = 1;
      for (int sym = 0; sym < alphabet; ++sym, stride *= static_cast<std::size_t>(base)) {
        if (static_cast<int>((s / stride) % static_cast<std::size_t>(base)) < cap) next[s + stride] += ways[s];
      }
    }
    ways.swap(next);
    if (len >= min_len) {
      for (auto w : ways) total += w;
    }
  }
  return total;
}

std::uint64_t count_sequences_enumerated(int alphabet, int cap, int min_len, int max_len) {
  if (alphabet < 1 || cap < 0 || min_len < 0 || max_len < min_len) throw std::invalid_argument("bad sequence grammar");
  std::vector<int> used(static_cast<std::size_t>(alphabet), 0);
  std::function<std::uint64_t(int)> walk = [&](int len) -> std::uint64_t {
    std::uint64_t count = len >= min_len ? 1 : 0;
    if (len == max_len) return count;
    for (auto& u : used) {
      if (u == cap) continue;
      ++u;
      count += walk(len + 1);
      --u;
    }
    return count;
  };
  return walk(0);
}

std::uint64_t count_solutions(const Environment& env, const State& current, const Image& target, int length) {
  check_budget(env, length);
  std::unordered_map<std::string, std::uint64_t> memo;
  std::function<std::uint64_t(const State&, int)> count = [&](const State& s, int remaining) -> std::uint64_t {
    if (remaining == 0) return is_goal(s.image, target) ? 1 : 0;
    std::string key = state_key(s);
    key.push_back(static_cast<char>(remaining));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::uint64_t total = 0;
    const ActionMask legal = env.legal_mask(s);
    for (int a = 0; a < env.action_count(); ++a) {
      if (legal(a)) total += count(env.apply(a, s), remaining - 1);
    }
    memo.emplace(std::move(key), total);
    return total;
  };
  return count(current, length);
}

}  // namespace itsr
