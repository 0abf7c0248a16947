#include <gtest/gtest.h>

#include "fringekit/baseline.hpp"
#include "fringekit/color.hpp"
#include "test_helpers.hpp"

using namespace fringekit;

namespace {

// Dark left half, bright right half, with a purple stripe on the dark side of
// the step.
ImageBuf fringed_step(int w, int h, int stripe_x) {
  ImageBuf img = fktest::solid(w, h, 0.05f, 0.05f, 0.05f);
  for (int y = 0; y < h; ++y) {
    for (int x = w / 2; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = 0.95f;
    img.at(0, stripe_x, y) = 0.6f;
    img.at(1, stripe_x, y) = 0.0f;
    img.at(2, stripe_x, y) = 0.8f;
  }
  return img;
}

}  // namespace

TEST(HeuristicDetect, NeutralImageHasEmptyMask) {
  const GrayBuf m = heuristic_detect(fktest::solid(12, 12, 0.4f, 0.4f, 0.4f));
  for (float v : m.data()) EXPECT_EQ(v, 0.0f);
}

TEST(HeuristicDetect, StripeAlongStepIsFlagged) {
  const ImageBuf img = fringed_step(24, 10, 11);
  const GrayBuf m = heuristic_detect(img);
  for (int y = 0; y < 10; ++y) {
    EXPECT_EQ(m.at(11, y), 1.0f);
    EXPECT_EQ(m.at(3, y), 0.0f);  // neutral
  }
}

TEST(HeuristicDetect, PurpleObjectFarFromEdgesIsIgnored) {
  // Left half is gray at the luma of (0.6, 0, 0.8), so the purple object
  // creates no luma edge of its own; the only edge is the step at x = 20.
  const float y0 = 0.299f * 0.6f + 0.114f * 0.8f;
  ImageBuf img = fringed_step(40, 10, 19);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 19; ++x)
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = y0;
  for (int y = 3; y < 6; ++y) {
    for (int x = 2; x < 5; ++x) {
      img.at(0, x, y) = 0.6f;
      img.at(1, x, y) = 0.0f;
      img.at(2, x, y) = 0.8f;
    }
  }
  const GrayBuf m = heuristic_detect(img);
  for (int y = 3; y < 6; ++y)
    for (int x = 2; x < 5; ++x) EXPECT_EQ(m.at(x, y), 0.0f);
  EXPECT_EQ(m.at(19, 0), 1.0f);
}

TEST(HeuristicCorrect, FullStrengthGivesLuma) {
  const ImageBuf img = fktest::solid(3, 3, 0.6f, 0.0f, 0.8f);
  GrayBuf mask(3, 3, 1.0f);
  const ImageBuf out = heuristic_correct(img, mask, 1.0);
  const double y = 0.299 * 0.6 + 0.114 * 0.8;  // 0.2706
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.at(c, 1, 1), y, 1e-6);
  EXPECT_NEAR(out.at(0, 0, 0), 0.2706, 1e-6);
}

TEST(HeuristicCorrect, ZeroStrengthAndUnflaggedPixelsUntouched) {
  const ImageBuf img = fktest::random_image(8, 8, 1);
  GrayBuf mask(8, 8);
  for (int y = 0; y < 8; y += 2) mask.at(y, y) = 1.0f;
  EXPECT_EQ(heuristic_correct(img, mask, 0.0), img);
  const ImageBuf out = heuristic_correct(img, mask, 0.7);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool flagged = mask.at(x, y) != 0.0f;
      for (int c = 0; c < 3; ++c) {
        if (!flagged) {
          EXPECT_EQ(out.at(c, x, y), img.at(c, x, y));
        }
      }
      const double l0 = luma(img.at(0, x, y), img.at(1, x, y), img.at(2, x, y));
      const double l1 = luma(out.at(0, x, y), out.at(1, x, y), out.at(2, x, y));
      EXPECT_NEAR(l0, l1, 1e-6);
    }
  }
  EXPECT_THROW(heuristic_correct(img, GrayBuf(4, 4), 1.0), Error);
}

TEST(HeuristicCorrect, StrengthIsMonotoneInSaturation) {
  const ImageBuf img = fktest::solid(2, 2, 0.6f, 0.1f, 0.8f);
  const GrayBuf mask(2, 2, 1.0f);
  double prev = 2.0;
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const ImageBuf out = heuristic_correct(img, mask, s);
    const double sat = rgb_to_hsv(out.at(0, 0, 0), out.at(1, 0, 0), out.at(2, 0, 0)).s;
    EXPECT_LE(sat, prev);
    prev = sat;
  }
}

TEST(HeuristicParams, Validation) {
  HeuristicParams p;
  p.strength = 1.5;
  EXPECT_THROW(p.validate(), Error);
  HeuristicParams q;
  q.near_radius = -1;
  EXPECT_THROW(q.validate(), Error);
}
