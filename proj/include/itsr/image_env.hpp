#pragma once

#include <string>
#include <vector>

#include "itsr/environment.hpp"

namespace itsr {

enum class Transform : int { Rotate90 = 0, Erode = 1, Dilate = 2, Blur = 3, Invert = 4 };
inline constexpr int kTransformCount = 5;

// Bit-exact transforms on square 8-bit images. Neighbourhood filters use a 3x3
// window with replicate (clamp-to-edge) padding.

/// Counterclockwise quarter turn: pixel (r, c) moves to (side-1-c, r).
Image rotate90(const Image& x);
/// 3x3 grayscale minimum.
Image erode(const Image& x);
/// 3x3 grayscale maximum.
Image dilate(const Image& x);
/// 3x3 box mean, rounded half up in integer arithmetic.
Image blur(const Image& x);
/// v -> 255 - v.
Image invert(const Image& x);

Image apply_transform(Transform t, const Image& x);
const char* transform_name(Transform t);

struct ImageEnvConfig {
  int image_side = 32;
  int max_len = 10;
  int max_repeats_per_transform = 2;

  void validate() const;
};

/// Rotate/erode/dilate/blur/invert over a pool of source images. State tags hold
/// the per-transform usage counter; a transform used max_repeats times is masked.
class ImageEnvironment final : public Environment {
 public:
  ImageEnvironment(ImageEnvConfig cfg, std::vector<Image> source_pool);

  std::string kind() const override { return "image"; }
  const std::vector<Action>& actions() const override { return actions_; }
  int image_side() const override { return cfg_.image_side; }
  int max_depth() const override { return cfg_.max_len; }

  ActionMask legal_mask(const State& state) const override;
  State apply(int action, const State& state) const override;
  State restore(const std::vector<std::int8_t>& tags, const Image& image) const override;
  Episode generate_pair(int max_len, Rng& rng) const override;

  State make_state(const Image& image) const;
  const ImageEnvConfig& config() const { return cfg_; }
  const std::vector<Image>& source_pool() const { return pool_; }

 private:
  ImageEnvConfig cfg_;
  std::vector<Image> pool_;
  std::vector<Action> actions_;
};

/// Reproducible procedural textures (smooth value noise plus random rectangles and discs).
std::vector<Image> make_fixture_pool(int count, int side, std::uint64_t seed);

}  // namespace itsr
