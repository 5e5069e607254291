#include <gtest/gtest.h>

#include <random>

#include "percept/occlusion.hpp"

using namespace percept;

namespace {

// Uniform-sample estimate of the visible share of `target`.
double monte_carlo_visible(const Rect& target, const std::vector<Rect>& occluders, int samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(target.u0, target.u1);
  std::uniform_real_distribution<double> v(target.v0, target.v1);
  int visible = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = u(rng);
    const double y = v(rng);
    bool hidden = false;
    for (const auto& o : occluders)
      if (o.contains(x, y)) {
        hidden = true;
        break;
      }
    visible += hidden ? 0 : 1;
  }
  return static_cast<double>(visible) / samples;
}

}  // namespace

TEST(Occlusion, NoOccludersIsFullyVisible) {
  const ImageBox t{{0, 0, 10, 10}, 20.0};
  EXPECT_DOUBLE_EQ(occlusion_fraction(t, {}), 1.0);
}

TEST(Occlusion, IdenticalNearerBoxHidesTarget) {
  const ImageBox t{{0, 0, 10, 10}, 20.0};
  const std::vector<ImageBox> o = {{{0, 0, 10, 10}, 10.0}};
  EXPECT_DOUBLE_EQ(occlusion_fraction(t, o), 0.0);
}

TEST(Occlusion, FartherBoxesAreIgnored) {
  const ImageBox t{{0, 0, 10, 10}, 20.0};
  const std::vector<ImageBox> o = {{{0, 0, 10, 10}, 20.0}, {{0, 0, 10, 10}, 30.0}};
  EXPECT_DOUBLE_EQ(occlusion_fraction(t, o), 1.0);
}

TEST(Occlusion, InclusionExclusionExample) {
  const ImageBox t{{0, 0, 10, 10}, 50.0};
  const std::vector<ImageBox> o = {{{0, 0, 6, 10}, 10.0}, {{4, 0, 10, 5}, 20.0}};
  EXPECT_NEAR(occlusion_fraction(t, o), 0.2, 1e-12);
  std::mt19937_64 rng(7);
  EXPECT_NEAR(monte_carlo_visible(t.rect, {o[0].rect, o[1].rect}, 100000, rng), 0.2, 0.01);
}

TEST(Occlusion, ZeroAreaTargetIsInvisible) {
  const ImageBox t{{3, 3, 3, 8}, 5.0};
  EXPECT_DOUBLE_EQ(occlusion_fraction(t, {}), 0.0);
}

TEST(UnionArea, MatchesMonteCarloOnRandomSets) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(0.0, 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Rect> rects;
    for (int i = 0; i < 6; ++i) {
      const double a = c(rng), b = c(rng), d = c(rng), e = c(rng);
      rects.push_back({std::min(a, b), std::min(d, e), std::max(a, b), std::max(d, e)});
    }
    const Rect all{0, 0, 100, 100};
    const double hidden = 1.0 - monte_carlo_visible(all, rects, 40000, rng);
    EXPECT_NEAR(union_area(rects) / all.area(), hidden, 0.015);
  }
}

TEST(VisibleFraction, WindowClipsTheVisibleArea) {
  const Rect t{0, 0, 10, 10};
  const Rect half[] = {{0, 0, 5, 10}};
  EXPECT_NEAR(visible_fraction(t, {}, half), 0.5, 1e-12);
  const Rect occ[] = {{0, 0, 2, 10}};
  EXPECT_NEAR(visible_fraction(t, occ, half), 0.3, 1e-12);
}

TEST(VisibleFraction, MonotoneInWindow) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(-20.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Rect t{-5, -2, 5, 2};
    std::vector<Rect> occ;
    for (int i = 0; i < 3; ++i) {
      const double a = c(rng), b = c(rng);
      occ.push_back({std::min(a, b), -1, std::max(a, b), 1});
    }
    double prev = -1.0;
    for (double w = 0.5; w <= 20.0; w += 0.5) {
      const Rect win[] = {{-w, -10, w, 10}};
      const double v = visible_fraction(t, occ, win);
      ASSERT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}
