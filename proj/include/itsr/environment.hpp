#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "itsr/image.hpp"

namespace itsr {

using Rng = std::mt19937_64;
using ActionMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Ordered list of action ids. Applied left to right.
using Trajectory = std::vector<int>;

struct Action {
  int id = 0;
  std::string name;
};

/// Environment state: the rendered image plus environment-specific bookkeeping
/// (grid cells for the toy environment, per-transform usage for the image one).
struct State {
  Image image;
  std::vector<std::int8_t> tags;

  friend bool operator==(const State&, const State&) = default;
};

struct StatePair {
  State current;
  Image target;
};

struct Episode {
  State source;
  Image target;
  Trajectory ground_truth;
  int reward = 0;
};

class IllegalAction : public std::runtime_error {
 public:
  IllegalAction(const std::string& what, int position = -1)
      : std::runtime_error(what), position_(position) {}
  /// Index into the trajectory when raised by apply_sequence, else -1.
  int position() const { return position_; }

 private:
  int position_;
};

class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic ITSR environment. Implementations are immutable after construction.
class Environment {
 public:
  virtual ~Environment() = default;

  /// "toy-constrained", "toy-free" or "image".
  virtual std::string kind() const = 0;
  virtual const std::vector<Action>& actions() const = 0;
  int action_count() const { return static_cast<int>(actions().size()); }
  int action_id(std::string_view name) const;
  const std::string& action_name(int id) const;

  virtual int image_side() const = 0;
  /// Longest trajectory the environment allows at evaluation time.
  virtual int max_depth() const = 0;

  virtual ActionMask legal_mask(const State& state) const = 0;
  /// Throws IllegalAction for masked or out-of-range actions, DimensionMismatch for wrong-sized states.
  virtual State apply(int action, const State& state) const = 0;

  /// Rebuilds a full state from its tags; `image` is used only where tags cannot determine it.
  virtual State restore(const std::vector<std::int8_t>& tags, const Image& image) const = 0;

  virtual Episode generate_pair(int max_len, Rng& rng) const = 0;
};

State apply_sequence(const Environment& env, const Trajectory& trajectory, const State& state);

inline bool is_goal(const Image& current, const Image& target) { return current == target; }
inline bool is_goal(const StatePair& s) { return is_goal(s.current.image, s.target); }

/// +1 on goal, -1 when the depth budget is spent without reaching it, 0 otherwise.
double reward(const StatePair& s, int depth, int max_depth);

/// splitmix64 finalizer, used to derive independent per-component seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::initializer_list<std::uint64_t> path = {});

}  // namespace itsr
