#include <gtest/gtest.h>

#include <map>
#include <set>

#include "itsr/oracle.hpp"
#include "itsr/toy_env.hpp"

using namespace itsr;

namespace {

ToyConfig config(ToyVariant v) {
  ToyConfig c;
  c.variant = v;
  return c;
}

GridState decode(int code, int cells) {
  GridState g(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) {
    g[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(code % 4 - 1);
    code /= 4;
  }
  return g;
}

}  // namespace

TEST(ToyActions, ConstrainedTable) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  ASSERT_EQ(env.action_count(), 4);
  EXPECT_EQ(env.action_name(0), "insert_triangle");
  EXPECT_EQ(env.action_name(3), "remove");
  EXPECT_EQ(env.action_id("insert_circle"), 1);
}

TEST(ToyActions, FreeTable) {
  const ToyEnvironment env(config(ToyVariant::Free));
  ASSERT_EQ(env.action_count(), 36);
  EXPECT_EQ(env.action_id("insert_square@4"), 2 * 9 + 4);
  EXPECT_EQ(env.action_id("remove@8"), 27 + 8);
  std::set<std::string> names;
  for (const auto& a : env.actions()) names.insert(a.name);
  EXPECT_EQ(names.size(), 36u);
}

TEST(ToyRender, InjectiveOverAllGrids) {
  // 4^9 free-variant grids must render to pairwise distinct images.
  ToyConfig cfg = config(ToyVariant::Free);
  std::map<std::uint64_t, int> seen;
  for (int code = 0; code < (1 << 18); ++code) {
    const GridState g = decode(code, 9);
    const Image im = render(g, cfg);
    auto [it, fresh] = seen.emplace(hash_image(im), code);
    if (!fresh) {
      ASSERT_FALSE(render(decode(it->second, 9), cfg) == im) << "grids " << it->second << " and " << code;
    }
  }
}

TEST(ToyRender, GlyphsDifferAndFitCell) {
  const auto& t = glyph_bitmap(Shape::Triangle);
  const auto& c = glyph_bitmap(Shape::Circle);
  const auto& s = glyph_bitmap(Shape::Square);
  EXPECT_NE(t, c);
  EXPECT_NE(c, s);
  EXPECT_NE(t, s);
  const ToyConfig cfg;
  GridState g(9, kEmptyCell);
  g[4] = static_cast<std::int8_t>(Shape::Square);
  const Image im = render(g, cfg);
  EXPECT_EQ(im.side(), 27);
  for (int r = 0; r < 27; ++r)
    for (int x = 0; x < 27; ++x) {
      const bool inside = r >= 9 && r < 18 && x >= 9 && x < 18;
      if (!inside) {
        EXPECT_EQ(im(r, x), 0);
      }
    }
  EXPECT_EQ(im(13, 13), 255);
}

TEST(ToyConstrained, MaskAndTransitions) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  State s = env.make_state(GridState(9, kEmptyCell));
  ActionMask m = env.legal_mask(s);
  EXPECT_TRUE(m(0) && m(1) && m(2));
  EXPECT_FALSE(m(3));
  EXPECT_THROW(env.apply(3, s), IllegalAction);
  s = env.apply(1, s);
  s = env.apply(0, s);
  EXPECT_EQ(s.tags[0], 1);
  EXPECT_EQ(s.tags[1], 0);
  EXPECT_EQ(s.tags[2], kEmptyCell);
  s = env.apply(3, s);
  EXPECT_EQ(s.tags[1], kEmptyCell);
  for (int i = 0; i < 8; ++i) s = env.apply(2, s);
  EXPECT_FALSE(env.legal_mask(s)(0));
  EXPECT_TRUE(env.legal_mask(s)(3));
  EXPECT_THROW(env.make_state(GridState{0, -1, 1, -1, -1, -1, -1, -1, -1}), std::invalid_argument);
}

TEST(ToyFree, MaskAndTransitions) {
  const ToyEnvironment env(config(ToyVariant::Free));
  State s = env.make_state(GridState(9, kEmptyCell));
  s = env.apply(env.action_id("insert_circle@5"), s);
  EXPECT_EQ(s.tags[5], 1);
  const ActionMask m = env.legal_mask(s);
  EXPECT_FALSE(m(env.action_id("insert_triangle@5")));
  EXPECT_TRUE(m(env.action_id("remove@5")));
  EXPECT_FALSE(m(env.action_id("remove@4")));
  EXPECT_EQ(m.count(), 8 * 3 + 1);
  EXPECT_THROW(env.apply(99, s), IllegalAction);
}

TEST(ToyEnv, RejectsWrongSizedState) {
  const ToyEnvironment env(config(ToyVariant::Free));
  State s = env.make_state(GridState(9, kEmptyCell));
  s.tags.pop_back();
  EXPECT_THROW(env.apply(0, s), DimensionMismatch);
}

TEST(ToyEnv, ApplySequenceReportsPosition) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  const State s = env.make_state(GridState(9, kEmptyCell));
  try {
    apply_sequence(env, {0, 3, 3}, s);
    FAIL();
  } catch (const IllegalAction& e) {
    EXPECT_EQ(e.position(), 2);
  }
}

TEST(ToyEnv, RestoreFromTags) {
  const ToyEnvironment env(config(ToyVariant::Free));
  Rng rng(4);
  const State s = env.make_state(env.sample_start(rng));
  EXPECT_EQ(env.restore(s.tags, Image()), s);
}

class ToyGeneration : public ::testing::TestWithParam<ToyVariant> {};

TEST_P(ToyGeneration, GroundTruthReplaysAndRespectsLength) {
  const ToyEnvironment env(config(GetParam()));
  Rng rng(5);
  for (int max_len : {1, 4, 8, 18}) {
    for (int i = 0; i < 200; ++i) {
      const Episode ep = env.generate_pair(max_len, rng);
      ASSERT_GE(ep.ground_truth.size(), 1u);
      ASSERT_LE(ep.ground_truth.size(), static_cast<std::size_t>(max_len));
      const State end = apply_sequence(env, ep.ground_truth, ep.source);
      ASSERT_EQ(end.image, ep.target);
      ASSERT_FALSE(ep.source.image == ep.target);
      // No strict prefix already reaches the target.
      State s = ep.source;
      for (std::size_t k = 0; k + 1 < ep.ground_truth.size(); ++k) {
        s = env.apply(ep.ground_truth[k], s);
        ASSERT_FALSE(s.image == ep.target);
      }
    }
  }
}

TEST_P(ToyGeneration, Deterministic) {
  const ToyEnvironment env(config(GetParam()));
  Rng a(6), b(6);
  for (int i = 0; i < 20; ++i) {
    const Episode x = env.generate_pair(8, a), y = env.generate_pair(8, b);
    EXPECT_EQ(x.ground_truth, y.ground_truth);
    EXPECT_EQ(x.source, y.source);
  }
}

INSTANTIATE_TEST_SUITE_P(Variants, ToyGeneration, ::testing::Values(ToyVariant::Constrained, ToyVariant::Free));

TEST(ToyConstrained, SolutionIsUniqueAndShortest) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const Episode ep = env.generate_pair(8, rng);
    const int len = static_cast<int>(ep.ground_truth.size());
    EXPECT_EQ(count_solutions(env, ep.source, ep.target, len), 1u);
    const auto best = bfs_solve(env, ep.source, ep.target, len);
    ASSERT_TRUE(best.has_value());
    EXPECT_EQ(*best, ep.ground_truth);
  }
}

TEST(ToyFree, MultipleSolutionsOccur) {
  // Independent cells commute, so most multi-step free episodes have several orderings.
  const ToyEnvironment env(config(ToyVariant::Free));
  Rng rng(8);
  int multi = 0;
  for (int i = 0; i < 50; ++i) {
    const Episode ep = env.generate_pair(3, rng);
    const int len = static_cast<int>(ep.ground_truth.size());
    const auto n = count_solutions(env, ep.source, ep.target, len);
    EXPECT_GE(n, 1u);
    if (n > 1) ++multi;
  }
  EXPECT_GT(multi, 0);
}

TEST(ToyStart, CellsAreEmptyAboutHalfTheTime) {
  const ToyEnvironment env(config(ToyVariant::Free));
  Rng rng(9);
  int empty = 0, total = 0;
  std::array<int, 3> shapes{};
  for (int i = 0; i < 4000; ++i) {
    for (auto v : env.sample_start(rng)) {
      ++total;
      if (v == kEmptyCell)
        ++empty;
      else
        ++shapes[static_cast<std::size_t>(v)];
    }
  }
  EXPECT_NEAR(static_cast<double>(empty) / total, 0.5, 0.01);
  for (int n : shapes) EXPECT_NEAR(static_cast<double>(n) / (total - empty), 1.0 / 3.0, 0.01);
}

TEST(ToyEnv, SmallestFreeGridHasTwoActions) {
  ToyConfig cfg = config(ToyVariant::Free);
  cfg.grid_size = 1;
  cfg.shape_count = 1;
  const ToyEnvironment env(cfg);
  EXPECT_EQ(env.action_count(), 2);
}

TEST(ToyRender, EmptyGridIsBlack) {
  const Image im = render(GridState(9, kEmptyCell), ToyConfig{});
  for (int r = 0; r < im.side(); ++r)
    for (int c = 0; c < im.side(); ++c) ASSERT_EQ(im(r, c), 0);
}

TEST(ToyConstrained, InsertIntoFullGridIsIllegal) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  const State s = env.make_state(GridState(9, static_cast<std::int8_t>(Shape::Square)));
  EXPECT_THROW(env.apply(env.action_id("insert_circle"), s), IllegalAction);
  EXPECT_EQ(env.legal_mask(s).count(), 1);
}

TEST(ToyConstrained, GroundTruthIsRemovalsThenInserts) {
  const ToyEnvironment env(config(ToyVariant::Constrained));
  const int remove = env.action_id("remove");
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const Episode ep = env.generate_pair(18, rng);
    bool inserting = false;
    for (int a : ep.ground_truth) {
      if (a != remove) inserting = true;
      ASSERT_FALSE(inserting && a == remove) << "pair " << i;
    }
  }
}

TEST(ToyFree, InsertThenRemoveRestoresGrid) {
  const ToyEnvironment env(config(ToyVariant::Free));
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const State s = env.make_state(env.sample_start(rng));
    for (int cell = 0; cell < 9; ++cell) {
      if (s.tags[static_cast<std::size_t>(cell)] != kEmptyCell) continue;
      const std::string at = "@" + std::to_string(cell);
      const State back = env.apply(env.action_id("remove" + at), env.apply(env.action_id("insert_square" + at), s));
      EXPECT_EQ(back, s);
    }
  }
}

TEST(ToyEnv, ApplySequenceIsAFoldAndPure) {
  const ToyEnvironment env(config(ToyVariant::Free));
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Episode ep = env.generate_pair(8, rng);
    const State before = ep.source;
    const Trajectory& t = ep.ground_truth;
    State folded = ep.source;
    for (int a : t) folded = env.apply(a, folded);
    EXPECT_EQ(apply_sequence(env, t, ep.source), folded);
    EXPECT_EQ(apply_sequence(env, t, ep.source), folded);
    EXPECT_EQ(ep.source, before);
    const std::size_t cut = t.size() / 2;
    const Trajectory head(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(cut));
    const Trajectory tail(t.begin() + static_cast<std::ptrdiff_t>(cut), t.end());
    EXPECT_EQ(apply_sequence(env, tail, apply_sequence(env, head, ep.source)), folded);
  }
}

TEST(Reward, GoalFailureAndNeutral) {
  const ToyEnvironment env(config(ToyVariant::Free));
  const State a = env.make_state(GridState(9, kEmptyCell));
  const State b = env.apply(0, a);
  EXPECT_EQ(reward({a, a.image}, 0, 18), 1.0);
  EXPECT_EQ(reward({a, a.image}, 18, 18), 1.0);
  EXPECT_EQ(reward({a, b.image}, 3, 18), 0.0);
  EXPECT_EQ(reward({a, b.image}, 18, 18), -1.0);
  EXPECT_TRUE(is_goal({b, b.image}));
  EXPECT_EQ(is_goal(a.image, b.image), is_goal(b.image, a.image));
}
