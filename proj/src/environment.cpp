#include "itsr/environment.hpp"

namespace itsr {

int Environment::action_id(std::string_view name) const {
  for (const auto& a : actions()) {
    if (a.name == name) return a.id;
  }
  throw IllegalAction("unknown action '" + std::string(name) + "' for environment " + kind());
}

const std::string& Environment::action_name(int id) const {
  if (id < 0 || id >= action_count()) throw IllegalAction("action id out of range: " + std::to_string(id));
  return actions()[static_cast<std::size_t>(id)].name;
}

State apply_sequence(const Environment& env, const Trajectory& trajectory, const State& state) {
  State current = state;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    try {
      current = env.apply(trajectory[i], current);
    } catch (const IllegalAction& e) {
      throw IllegalAction(std::string(e.what()) + " at position " + std::to_string(i), static_cast<int>(i));
    }
  }
  return current;
}

double reward(const StatePair& s, int depth, int max_depth) {
  if (is_goal(s)) return 1.0;
  if (depth >= max_depth) return -1.0;
  return 0.0;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t s = mix_seed(master, h);
  for (auto p : path) s = mix_seed(s, p);
  return s;
}

}  // namespace itsr
