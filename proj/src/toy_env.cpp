#include "itsr/toy_env.hpp"

#include <algorithm>

namespace itsr {

namespace {

constexpr const char* kShapeNames[kMaxShapes] = {"triangle", "circle", "square"};
constexpr int kMaxAttempts = 10000;

using Bitmap = std::array<std::array<std::uint8_t, 9>, 9>;

// Fixed glyphs inside a one-pixel background margin.
constexpr Bitmap kTriangle = {{
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 0, 1, 0, 0, 0, 0},
    {0, 0, 0, 1, 1, 1, 0, 0, 0},
    {0, 0, 0, 1, 1, 1, 0, 0, 0},
    {0, 0, 1, 1, 1, 1, 1, 0, 0},
    {0, 0, 1, 1, 1, 1, 1, 0, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
}};
constexpr Bitmap kCircle = {{
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 0, 0, 1, 1, 1, 0, 0, 0},
    {0, 0, 1, 0, 0, 0, 1, 0, 0},
    {0, 1, 0, 0, 0, 0, 0, 1, 0},
    {0, 1, 0, 0, 0, 0, 0, 1, 0},
    {0, 1, 0, 0, 0, 0, 0, 1, 0},
    {0, 0, 1, 0, 0, 0, 1, 0, 0},
    {0, 0, 0, 1, 1, 1, 0, 0, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
}};
constexpr Bitmap kSquare = {{
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 1, 1, 1, 1, 1, 1, 1, 0},
    {0, 0, 0, 0, 0, 0, 0, 0, 0},
}};

int occupied_count(const GridState& grid) {
  return static_cast<int>(std::count_if(grid.begin(), grid.end(), [](auto v) { return v != kEmptyCell; }));
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

void ToyConfig::validate() const {
  if (grid_size < 1) throw std::invalid_argument("toy grid_size must be >= 1");
  if (shape_count < 1 || shape_count > kMaxShapes) throw std::invalid_argument("toy shape_count must be in [1, 3]");
  if (cell_pixels < 5) throw std::invalid_argument("toy cell_pixels must be >= 5");
}

const Bitmap& glyph_bitmap(Shape shape) {
  switch (shape) {
    case Shape::Triangle: return kTriangle;
    case Shape::Circle: return kCircle;
    case Shape::Square: return kSquare;
  }
  return kSquare;
}

std::vector<Action> toy_action_table(const ToyConfig& cfg) {
  std::vector<Action> table;
  if (cfg.variant == ToyVariant::Constrained) {
    for (int s = 0; s < cfg.shape_count; ++s) table.push_back({s, std::string("insert_") + kShapeNames[s]});
    table.push_back({cfg.shape_count, "remove"});
  } else {
    const int n = cfg.cells();
    for (int s = 0; s < cfg.shape_count; ++s) {
      for (int c = 0; c < n; ++c) {
        table.push_back({s * n + c, std::string("insert_") + kShapeNames[s] + "@" + std::to_string(c)});
      }
    }
    for (int c = 0; c < n; ++c) table.push_back({cfg.shape_count * n + c, "remove@" + std::to_string(c)});
  }
  return table;
}

ActionMask toy_legal_mask(const GridState& grid, const ToyConfig& cfg) {
  const int n = cfg.cells();
  if (cfg.variant == ToyVariant::Constrained) {
    const int occupied = occupied_count(grid);
    ActionMask mask(cfg.shape_count + 1);
    mask.head(cfg.shape_count).setConstant(occupied < n);
    mask(cfg.shape_count) = occupied > 0;
    return mask;
  }
  ActionMask mask(cfg.shape_count * n + n);
  for (int c = 0; c < n; ++c) {
    const bool empty = grid[static_cast<std::size_t>(c)] == kEmptyCell;
    for (int s = 0; s < cfg.shape_count; ++s) mask(s * n + c) = empty;
    mask(cfg.shape_count * n + c) = !empty;
  }
  return mask;
}

Image render(const GridState& grid, const ToyConfig& cfg) {
  const int cp = cfg.cell_pixels;
  Image image(cfg.image_side(), 0);
  for (int cell = 0; cell < cfg.cells(); ++cell) {
    const auto v = grid[static_cast<std::size_t>(cell)];
    if (v == kEmptyCell) continue;
    const auto& glyph = glyph_bitmap(static_cast<Shape>(v));
    const int r0 = (cell / cfg.grid_size) * cp;
    const int c0 = (cell % cfg.grid_size) * cp;
    for (int r = 0; r < cp; ++r) {
      for (int c = 0; c < cp; ++c) {
        // Nearest-neighbour resample of the 9x9 bitmap onto the cell patch.
        const int gr = (r * 9) / cp;
        const int gc = (c * 9) / cp;
        if (glyph[static_cast<std::size_t>(gr)][static_cast<std::size_t>(gc)]) image(r0 + r, c0 + c) = 255;
      }
    }
  }
  return image;
}

ToyEnvironment::ToyEnvironment(ToyConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  actions_ = toy_action_table(cfg_);
}

std::string ToyEnvironment::kind() const {
  return cfg_.variant == ToyVariant::Constrained ? "toy-constrained" : "toy-free";
}

void ToyEnvironment::check_grid(const GridState& grid) const {
  if (static_cast<int>(grid.size()) != cfg_.cells()) {
    throw DimensionMismatch("grid has " + std::to_string(grid.size()) + " cells, expected " +
                            std::to_string(cfg_.cells()));
  }
  bool seen_empty = false;
  for (auto v : grid) {
    if (v != kEmptyCell && (v < 0 || v >= cfg_.shape_count)) throw std::invalid_argument("bad shape index in grid");
    if (cfg_.variant == ToyVariant::Constrained) {
      if (v == kEmptyCell) seen_empty = true;
      else if (seen_empty) throw std::invalid_argument("constrained grid must be filled as a prefix");
    }
  }
}

State ToyEnvironment::make_state(const GridState& grid) const {
  check_grid(grid);
  return State{render(grid, cfg_), grid};
}

State ToyEnvironment::restore(const std::vector<std::int8_t>& tags, const Image&) const { return make_state(tags); }

ActionMask ToyEnvironment::legal_mask(const State& state) const { return toy_legal_mask(state.tags, cfg_); }

State ToyEnvironment::apply(int action, const State& state) const {
  if (state.image.side() != image_side() || static_cast<int>(state.tags.size()) != cfg_.cells()) {
    throw DimensionMismatch("state does not match toy environment dimensions");
  }
  if (action < 0 || action >= action_count()) throw IllegalAction("action id out of range: " + std::to_string(action));
  if (!legal_mask(state)(action)) throw IllegalAction("illegal action " + actions_[static_cast<std::size_t>(action)].name);

  GridState grid = state.tags;
  const int n = cfg_.cells();
  if (cfg_.variant == ToyVariant::Constrained) {
    const int occupied = occupied_count(grid);
    if (action == cfg_.shape_count) {
      grid[static_cast<std::size_t>(occupied - 1)] = kEmptyCell;
    } else {
      grid[static_cast<std::size_t>(occupied)] = static_cast<std::int8_t>(action);
    }
  } else if (action < cfg_.shape_count * n) {
    grid[static_cast<std::size_t>(action % n)] = static_cast<std::int8_t>(action / n);
  } else {
    grid[static_cast<std::size_t>(action - cfg_.shape_count * n)] = kEmptyCell;
  }
  return State{render(grid, cfg_), std::move(grid)};
}

GridState ToyEnvironment::sample_start(Rng& rng) const {
  GridState grid(static_cast<std::size_t>(cfg_.cells()), kEmptyCell);
  for (auto& cell : grid) {
    if (std::bernoulli_distribution(0.5)(rng)) continue;
    cell = static_cast<std::int8_t>(uniform_int(rng, 0, cfg_.shape_count - 1));
  }
  if (cfg_.variant == ToyVariant::Constrained) {
    std::stable_partition(grid.begin(), grid.end(), [](auto v) { return v != kEmptyCell; });
  }
  return grid;
}

Episode ToyEnvironment::generate_pair(int max_len, Rng& rng) const {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  return cfg_.variant == ToyVariant::Constrained ? generate_constrained(max_len, rng) : generate_free(max_len, rng);
}

// Removals first, then insertions. A sequence whose first insertion restores the
// last removed shape is not minimal, so it is rejected to keep the solution unique.
Episode ToyEnvironment::generate_constrained(int max_len, Rng& rng) const {
  const int n = cfg_.cells();
  const int remove_id = cfg_.shape_count;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const GridState start = sample_start(rng);
    const int occupied = occupied_count(start);
    const int length = uniform_int(rng, 1, max_len);
    const int min_removals = std::max(0, (length - n + occupied + 1) / 2);
    const int max_removals = std::min(length, occupied);
    if (min_removals > max_removals) continue;
    const int removals = uniform_int(rng, min_removals, max_removals);
    Trajectory gt(static_cast<std::size_t>(removals), remove_id);
    for (int i = removals; i < length; ++i) gt.push_back(uniform_int(rng, 0, cfg_.shape_count - 1));
    if (removals > 0 && length > removals &&
        gt[static_cast<std::size_t>(removals)] == start[static_cast<std::size_t>(occupied - removals)]) {
      continue;
    }
    Episode ep;
    ep.source = make_state(start);
    ep.target = apply_sequence(*this, gt, ep.source).image;
    ep.ground_truth = std::move(gt);
    ep.reward = 1;
    return ep;
  }
  throw GenerationFailure("constrained toy generation exhausted its attempts");
}

// Uniform legal random walk; rejected when the target equals the source or any
// strict prefix already reaches it.
Episode ToyEnvironment::generate_free(int max_len, Rng& rng) const {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const State source = make_state(sample_start(rng));
    const int length = uniform_int(rng, 1, max_len);
    std::vector<Image> visited{source.image};
    Trajectory gt;
    State current = source;
    for (int i = 0; i < length; ++i) {
      const ActionMask mask = legal_mask(current);
      std::vector<int> legal;
      for (int a = 0; a < action_count(); ++a) {
        if (mask(a)) legal.push_back(a);
      }
      const int a = legal[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(legal.size()) - 1))];
      current = apply(a, current);
      gt.push_back(a);
      visited.push_back(current.image);
    }
    const bool shortcut = std::any_of(visited.begin(), visited.end() - 1,
                                      [&](const Image& im) { return im == current.image; });
    if (shortcut) continue;
    return Episode{source, current.image, std::move(gt), 1};
  }
  throw GenerationFailure("free toy generation exhausted its attempts");
}

}  // namespace itsr
