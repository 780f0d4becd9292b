#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "itsr/environment.hpp"

namespace itsr {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest action_count^depth the brute-force routines accept.
inline constexpr double kEnumerationBudget = 1e7;

/// Shortest action sequence taking `current` to `target` within max_depth, or nullopt.
std::optional<Trajectory> bfs_solve(const Environment& env, const State& current, const Image& target, int max_depth);

/// Sequences over `alphabet` symbols, each used at most `cap` times, with length in
/// [min_len, max_len]. Dynamic programming over per-symbol usage vectors.
std::uint64_t count_sequences(int alphabet, int cap, int min_len, int max_len);
/// Same count by explicit depth-first enumeration; for cross-checking small cases.
std::uint64_t count_sequences_enumerated(int alphabet, int cap, int min_len, int max_len);

/// Distinct legal action sequences of exactly `length` steps mapping current to target.
std::uint64_t count_solutions(const Environment& env, const State& current, const Image& target, int length);

}  // namespace itsr
