#pragma once

#include <vector>

#include <json.hpp>

#include "itsr/environment.hpp"
#include "itsr/mcts.hpp"

namespace itsr {

/// JSON array of action names.
nlohmann::json trajectory_to_json(const Environment& env, const Trajectory& t);
Trajectory trajectory_from_json(const Environment& env, const nlohmann::json& j);

/// Toy episodes carry grid cells ("source_cells", "target_cells"); image episodes
/// carry row-major pixel lists plus "side". Both carry "env" and "ground_truth".
nlohmann::json episode_to_json(const Environment& env, const Episode& episode);
/// Validates that the ground truth replays from source to target.
Episode episode_from_json(const Environment& env, const nlohmann::json& j);

nlohmann::json search_trace_to_json(const Environment& env, const std::vector<MoveTrace>& trace);

}  // namespace itsr
