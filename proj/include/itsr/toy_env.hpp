#pragma once

#include <array>
#include <string>
#include <vector>

#include "itsr/environment.hpp"

namespace itsr {

enum class ToyVariant { Constrained, Free };

enum class Shape : int { Triangle = 0, Circle = 1, Square = 2 };
inline constexpr int kMaxShapes = 3;

struct ToyConfig {
  int grid_size = 3;
  int shape_count = 3;  // prefix of {Triangle, Circle, Square}
  ToyVariant variant = ToyVariant::Constrained;
  int cell_pixels = 9;

  int cells() const { return grid_size * grid_size; }
  int image_side() const { return grid_size * cell_pixels; }
  void validate() const;
};

/// Grid cells in row-major order; -1 is empty, otherwise a shape index.
using GridState = std::vector<std::int8_t>;
inline constexpr std::int8_t kEmptyCell = -1;

std::vector<Action> toy_action_table(const ToyConfig& cfg);
ActionMask toy_legal_mask(const GridState& grid, const ToyConfig& cfg);
Image render(const GridState& grid, const ToyConfig& cfg);

/// The 9x9 glyph bitmap for a shape (1 = foreground).
const std::array<std::array<std::uint8_t, 9>, 9>& glyph_bitmap(Shape shape);

/// Shape insertion/removal on a CxC grid, rendered to grayscale.
class ToyEnvironment final : public Environment {
 public:
  explicit ToyEnvironment(ToyConfig cfg);

  std::string kind() const override;
  const std::vector<Action>& actions() const override { return actions_; }
  int image_side() const override { return cfg_.image_side(); }
  /// C^2 insertions plus at most C^2 removals.
  int max_depth() const override { return 2 * cfg_.cells(); }

  ActionMask legal_mask(const State& state) const override;
  State apply(int action, const State& state) const override;
  State restore(const std::vector<std::int8_t>& tags, const Image& image) const override;
  Episode generate_pair(int max_len, Rng& rng) const override;

  State make_state(const GridState& grid) const;
  GridState sample_start(Rng& rng) const;
  const ToyConfig& config() const { return cfg_; }

 private:
  Episode generate_constrained(int max_len, Rng& rng) const;
  Episode generate_free(int max_len, Rng& rng) const;
  void check_grid(const GridState& grid) const;

  ToyConfig cfg_;
  std::vector<Action> actions_;
};

}  // namespace itsr
