#include "itsr/image_env.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace itsr {

namespace {

constexpr int kMaxAttempts = 10000;

template <typename Reduce>
Image neighbourhood(const Image& x, Reduce reduce) {
  const int n = x.side();
  Image out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      int acc = reduce.init();
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = std::clamp(r + dr, 0, n - 1);
        for (int dc = -1; dc <= 1; ++dc) {
          acc = reduce(acc, x(rr, std::clamp(c + dc, 0, n - 1)));
        }
      }
      out(r, c) = static_cast<std::uint8_t>(reduce.finish(acc));
    }
  }
  return out;
}

struct MinReduce {
  int init() const { return 255; }
  int operator()(int a, int v) const { return std::min(a, v); }
  int finish(int a) const { return a; }
};
struct MaxReduce {
  int init() const { return 0; }
  int operator()(int a, int v) const { return std::max(a, v); }
  int finish(int a) const { return a; }
};
struct MeanReduce {
  int init() const { return 0; }
  int operator()(int a, int v) const { return a + v; }
  // sum / 9 never has fractional part exactly 1/2, so +4 is round-half-up.
  int finish(int a) const { return (a + 4) / 9; }
};

}  // namespace

Image rotate90(const Image& x) {
  const int n = x.side();
  Image out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(n - 1 - c, r) = x(r, c);
  }
  return out;
}

Image erode(const Image& x) { return neighbourhood(x, MinReduce{}); }
Image dilate(const Image& x) { return neighbourhood(x, MaxReduce{}); }
Image blur(const Image& x) { return neighbourhood(x, MeanReduce{}); }

Image invert(const Image& x) {
  PixelArray out = (255 - x.pixels().cast<int>()).cast<std::uint8_t>();
  return Image(std::move(out));
}

Image apply_transform(Transform t, const Image& x) {
  switch (t) {
    case Transform::Rotate90: return rotate90(x);
    case Transform::Erode: return erode(x);
    case Transform::Dilate: return dilate(x);
    case Transform::Blur: return blur(x);
    case Transform::Invert: return invert(x);
  }
  throw IllegalAction("unknown transform");
}

const char* transform_name(Transform t) {
  switch (t) {
    case Transform::Rotate90: return "rotate90";
    case Transform::Erode: return "erode";
    case Transform::Dilate: return "dilate";
    case Transform::Blur: return "blur";
    case Transform::Invert: return "invert";
  }
  return "?";
}

void ImageEnvConfig::validate() const {
  if (image_side < 1) throw std::invalid_argument("image_side must be >= 1");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (max_repeats_per_transform < 1) throw std::invalid_argument("max_repeats_per_transform must be >= 1");
}

ImageEnvironment::ImageEnvironment(ImageEnvConfig cfg, std::vector<Image> source_pool)
    : cfg_(cfg), pool_(std::move(source_pool)) {
  cfg_.validate();
  for (const auto& im : pool_) {
    if (im.side() != cfg_.image_side) {
      throw DimensionMismatch("source image side " + std::to_string(im.side()) + " != " +
                              std::to_string(cfg_.image_side));
    }
  }
  for (int t = 0; t < kTransformCount; ++t) actions_.push_back({t, transform_name(static_cast<Transform>(t))});
}

State ImageEnvironment::make_state(const Image& image) const {
  if (image.side() != cfg_.image_side) throw DimensionMismatch("image does not match environment side");
  return State{image, std::vector<std::int8_t>(kTransformCount, 0)};
}

State ImageEnvironment::restore(const std::vector<std::int8_t>& tags, const Image& image) const {
  if (tags.size() != static_cast<std::size_t>(kTransformCount)) throw DimensionMismatch("usage counter must have 5 entries");
  for (auto t : tags) {
    if (t < 0 || t > cfg_.max_repeats_per_transform) throw std::invalid_argument("usage count out of range");
  }
  State s = make_state(image);
  s.tags = tags;
  return s;
}

ActionMask ImageEnvironment::legal_mask(const State& state) const {
  ActionMask mask(kTransformCount);
  for (int t = 0; t < kTransformCount; ++t) mask(t) = state.tags[static_cast<std::size_t>(t)] < cfg_.max_repeats_per_transform;
  return mask;
}

State ImageEnvironment::apply(int action, const State& state) const {
  if (state.image.side() != cfg_.image_side || state.tags.size() != static_cast<std::size_t>(kTransformCount)) {
    throw DimensionMismatch("state does not match image environment dimensions");
  }
  if (action < 0 || action >= kTransformCount) throw IllegalAction("action id out of range: " + std::to_string(action));
  if (state.tags[static_cast<std::size_t>(action)] >= cfg_.max_repeats_per_transform) {
    throw IllegalAction(std::string(transform_name(static_cast<Transform>(action))) + " already used " +
                        std::to_string(cfg_.max_repeats_per_transform) + " times");
  }
  State next{apply_transform(static_cast<Transform>(action), state.image), state.tags};
  ++next.tags[static_cast<std::size_t>(action)];
  return next;
}

Episode ImageEnvironment::generate_pair(int max_len, Rng& rng) const {
  if (pool_.empty()) throw GenerationFailure("source pool is empty");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  const int cap = cfg_.max_repeats_per_transform;
  const int limit = std::min({max_len, cfg_.max_len, cap * kTransformCount});
  std::uniform_int_distribution<int> pick_symbol(0, kTransformCount - 1);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto& source_image = pool_[std::uniform_int_distribution<std::size_t>(0, pool_.size() - 1)(rng)];
    const int length = std::uniform_int_distribution<int>(1, limit)(rng);
    // Uniform over constrained sequences of this length, by rejection.
    Trajectory gt;
    std::array<int, kTransformCount> used{};
    while (static_cast<int>(gt.size()) < length) {
      gt.clear();
      used.fill(0);
      bool ok = true;
      for (int i = 0; i < length && ok; ++i) {
        const int t = pick_symbol(rng);
        ok = ++used[static_cast<std::size_t>(t)] <= cap;
        gt.push_back(t);
      }
      if (!ok) gt.clear();
    }
    State source = make_state(source_image);
    std::vector<Image> visited{source.image};
    State current = source;
    for (int a : gt) {
      current = apply(a, current);
      visited.push_back(current.image);
    }
    const bool shortcut = std::any_of(visited.begin(), visited.end() - 1,
                                      [&](const Image& im) { return im == current.image; });
    if (shortcut) continue;
    return Episode{std::move(source), current.image, std::move(gt), 1};
  }
  throw GenerationFailure("image pair generation exhausted its attempts");
}

std::vector<Image> make_fixture_pool(int count, int side, std::uint64_t seed) {
  std::vector<Image> pool;
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, "fixture", {static_cast<std::uint64_t>(i)}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Bilinear value noise on a 5x5 lattice.
    constexpr int kLattice = 5;
    Eigen::MatrixXd lattice(kLattice, kLattice);
    for (int r = 0; r < kLattice; ++r)
      for (int c = 0; c < kLattice; ++c) lattice(r, c) = unit(rng);
    Eigen::MatrixXd field(side, side);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const double fy = static_cast<double>(r) * (kLattice - 1) / std::max(1, side - 1);
        const double fx = static_cast<double>(c) * (kLattice - 1) / std::max(1, side - 1);
        const int y0 = std::min(static_cast<int>(fy), kLattice - 2);
        const int x0 = std::min(static_cast<int>(fx), kLattice - 2);
        const double ty = fy - y0, tx = fx - x0;
        field(r, c) = (1 - ty) * ((1 - tx) * lattice(y0, x0) + tx * lattice(y0, x0 + 1)) +
                      ty * ((1 - tx) * lattice(y0 + 1, x0) + tx * lattice(y0 + 1, x0 + 1));
      }
    }
    field *= 160.0;

    const int shapes = 2 + static_cast<int>(unit(rng) * 4);
    for (int s = 0; s < shapes; ++s) {
      const double value = 255.0 * unit(rng);
      const int cy = static_cast<int>(unit(rng) * side), cx = static_cast<int>(unit(rng) * side);
      const int extent = 2 + static_cast<int>(unit(rng) * side / 3);
      const bool disc = unit(rng) < 0.5;
      for (int r = std::max(0, cy - extent); r < std::min(side, cy + extent); ++r) {
        for (int c = std::max(0, cx - extent); c < std::min(side, cx + extent); ++c) {
          if (disc && (r - cy) * (r - cy) + (c - cx) * (c - cx) > extent * extent) continue;
          field(r, c) = value;
        }
      }
    }
    PixelArray pixels(side, side);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        pixels(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(field(r, c)), 0L, 255L));
    pool.emplace_back(std::move(pixels));
  }
  return pool;
}

}  // namespace itsr
