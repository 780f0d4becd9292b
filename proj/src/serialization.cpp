#include "itsr/serialization.hpp"

#include "itsr/image_env.hpp"

namespace itsr {

namespace {

nlohmann::json pixels_to_json(const Image& image) {
  return std::vector<int>(image.data(), image.data() + image.size());
}

Image pixels_from_json(const nlohmann::json& j, int side) {
  const auto values = j.get<std::vector<int>>();
  if (static_cast<int>(values.size()) != side * side) throw DimensionMismatch("pixel list does not match side");
  Image image(side);
  for (int i = 0; i < side * side; ++i) {
    if (values[static_cast<std::size_t>(i)] < 0 || values[static_cast<std::size_t>(i)] > 255) {
      throw std::invalid_argument("pixel value out of range");
    }
    image.pixels().data()[i] = static_cast<std::uint8_t>(values[static_cast<std::size_t>(i)]);
  }
  return image;
}

std::vector<std::int8_t> tags_from_json(const nlohmann::json& j) {
  std::vector<std::int8_t> tags;
  for (int v : j.get<std::vector<int>>()) tags.push_back(static_cast<std::int8_t>(v));
  return tags;
}

}  // namespace

nlohmann::json trajectory_to_json(const Environment& env, const Trajectory& t) {
  auto j = nlohmann::json::array();
  for (int a : t) j.push_back(env.action_name(a));
  return j;
}

Trajectory trajectory_from_json(const Environment& env, const nlohmann::json& j) {
  Trajectory t;
  for (const auto& name : j) t.push_back(env.action_id(name.get<std::string>()));
  return t;
}

nlohmann::json episode_to_json(const Environment& env, const Episode& episode) {
  nlohmann::json j;
  j["env"] = env.kind();
  j["ground_truth"] = trajectory_to_json(env, episode.ground_truth);
  if (env.kind() == "image") {
    j["side"] = env.image_side();
    j["source_pixels"] = pixels_to_json(episode.source.image);
    j["target_pixels"] = pixels_to_json(episode.target);
  } else {
    const State target = apply_sequence(env, episode.ground_truth, episode.source);
    j["source_cells"] = std::vector<int>(episode.source.tags.begin(), episode.source.tags.end());
    j["target_cells"] = std::vector<int>(target.tags.begin(), target.tags.end());
  }
  return j;
}

Episode episode_from_json(const Environment& env, const nlohmann::json& j) {
  if (j.at("env").get<std::string>() != env.kind()) {
    throw std::invalid_argument("episode is for environment " + j.at("env").get<std::string>() + ", not " + env.kind());
  }
  Episode ep;
  ep.ground_truth = trajectory_from_json(env, j.at("ground_truth"));
  if (env.kind() == "image") {
    const int side = j.at("side").get<int>();
    ep.source = env.restore(std::vector<std::int8_t>(kTransformCount, 0), pixels_from_json(j.at("source_pixels"), side));
    ep.target = pixels_from_json(j.at("target_pixels"), side);
  } else {
    ep.source = env.restore(tags_from_json(j.at("source_cells")), Image());
    ep.target = env.restore(tags_from_json(j.at("target_cells")), Image()).image;
  }
  if (!is_goal(apply_sequence(env, ep.ground_truth, ep.source).image, ep.target)) {
    throw std::invalid_argument("episode ground truth does not reach its target");
  }
  ep.reward = 1;
  return ep;
}

nlohmann::json search_trace_to_json(const Environment& env, const std::vector<MoveTrace>& trace) {
  auto moves = nlohmann::json::array();
  for (const auto& m : trace) {
    nlohmann::json move;
    move["depth"] = m.depth;
    move["value"] = m.value;
    move["chosen"] = env.action_name(m.chosen);
    auto edges = nlohmann::json::array();
    for (std::size_t i = 0; i < m.actions.size(); ++i) {
      edges.push_back({{"action", env.action_name(m.actions[i])}, {"prior", m.priors[i]}, {"visits", m.visits[i]}});
    }
    move["edges"] = std::move(edges);
    moves.push_back(std::move(move));
  }
  return moves;
}

}  // namespace itsr
