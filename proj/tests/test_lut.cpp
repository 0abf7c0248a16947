#include <gtest/gtest.h>

#include <cmath>

#include "fringekit/lut.hpp"
#include "test_helpers.hpp"

using namespace fringekit;

namespace {

Lut5D random_lut5(std::uint64_t seed) {
  Rng rng(seed);
  Lut5D lut = Lut5D::identity();
  for (double& v : lut.entries) v = rng.uniform(0, 1);
  return lut;
}

Coord5 random_coord(Rng& rng) {
  Coord5 c;
  for (double& v : c) v = rng.uniform(0, 1);
  return c;
}

// Direct multilinear interpolation over all 32 corners, written without the
// library's cell helpers.
double naive_lookup(const Lut5D& lut, const Coord5& c) {
  int lo[5];
  double t[5];
  for (int d = 0; d < 5; ++d) {
    const double p = std::clamp(c[d], 0.0, 1.0) * (kLut5DRes - 1);
    lo[d] = std::min(static_cast<int>(std::floor(p)), kLut5DRes - 2);
    t[d] = p - lo[d];
  }
  double sum = 0.0;
  for (int b0 = 0; b0 < 2; ++b0)
    for (int b1 = 0; b1 < 2; ++b1)
      for (int b2 = 0; b2 < 2; ++b2)
        for (int b3 = 0; b3 < 2; ++b3)
          for (int b4 = 0; b4 < 2; ++b4) {
            const int b[5] = {b0, b1, b2, b3, b4};
            double w = 1.0;
            for (int d = 0; d < 5; ++d) w *= b[d] ? t[d] : 1.0 - t[d];
            sum += w * lut.entries[Lut5D::index(lo[0] + b0, lo[1] + b1, lo[2] + b2, lo[3] + b3, lo[4] + b4)];
          }
  return sum;
}

}  // namespace

TEST(Lut1D, IdentityIsExactAtNodesAndLinearBetween) {
  const Lut1D lut = Lut1D::identity();
  ASSERT_EQ(lut.entries.size(), 1024u);
  EXPECT_EQ(lut.entries[0], 0.0);
  EXPECT_EQ(lut.entries[1023], 1.0);
  for (int k = 0; k < 1024; k += 31) EXPECT_NEAR(lookup_1d(lut, k / 1023.0), k / 1023.0, 1e-15);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const double x = rng.uniform01();
    EXPECT_NEAR(lookup_1d(lut, x), x, 1e-12);
  }
}

TEST(Lut1D, DomainMappingAndClamp) {
  const Lut1D lut = Lut1D::identity(-1.5, 1.5);
  EXPECT_NEAR(lookup_1d(lut, 0.25), 0.25, 1e-12);
  EXPECT_NEAR(lookup_1d(lut, -2.0), -1.5, 1e-12);
  EXPECT_NEAR(lookup_1d(lut, 9.0), 1.5, 1e-12);
}

TEST(Lut1D, MidpointAveragesNeighbours) {
  Lut1D lut = Lut1D::identity();
  Rng rng(2);
  for (double& v : lut.entries) v = rng.uniform01();
  for (int k = 0; k < 1023; k += 50) {
    const double x = (k + 0.5) / 1023.0;
    EXPECT_NEAR(lookup_1d(lut, x), 0.5 * (lut.entries[k] + lut.entries[k + 1]), 1e-12);
  }
}

TEST(Lut1D, BackwardMatchesFiniteDifferences) {
  Lut1D lut = Lut1D::identity(-1.5, 1.5);
  Rng rng(3);
  for (double& v : lut.entries) v = rng.uniform01();
  for (int t = 0; t < 20; ++t) {
    const double x = rng.uniform(-1.4, 1.4);
    const Lut1DBackward g = lookup_1d_backward(lut, x, 1.0);
    const double h = 1e-7;
    const double num_x = (lookup_1d(lut, x + h) - lookup_1d(lut, x - h)) / (2 * h);
    EXPECT_NEAR(g.input_grad, num_x, 1e-4 * std::max(1.0, std::abs(num_x)));
    for (int side = 0; side < 2; ++side) {
      Lut1D a = lut, b = lut;
      a.entries[g.lower + side] += 1e-6;
      b.entries[g.lower + side] -= 1e-6;
      const double num = (lookup_1d(a, x) - lookup_1d(b, x)) / 2e-6;
      EXPECT_NEAR(side ? g.grad_upper : g.grad_lower, num, 1e-7);
    }
  }
  EXPECT_EQ(lookup_1d_backward(lut, 2.0, 1.0).input_grad, 0.0);
}

TEST(Lut5D, IdentityReturnsLuminanceCoordinate) {
  const Lut5D lut = Lut5D::identity();
  ASSERT_EQ(lut.entries.size(), kLut5DSize);
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const Coord5 c = random_coord(rng);
    EXPECT_NEAR(lookup_5d(lut, c), c[0], 1e-12);
  }
}

TEST(Lut5D, GridPointsReturnStoredEntriesExactly) {
  const Lut5D lut = random_lut5(5);
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    int i[5];
    Coord5 c;
    for (int d = 0; d < 5; ++d) {
      i[d] = static_cast<int>(rng.next() % kLut5DRes);
      c[d] = i[d] / 8.0;
    }
    EXPECT_EQ(lookup_5d(lut, c), lut.entries[Lut5D::index(i[0], i[1], i[2], i[3], i[4])]);
  }
}

TEST(Lut5D, CellCentreIsMeanOfCorners) {
  const Lut5D lut = random_lut5(7);
  const Coord5 c{2.5 / 8, 0.5 / 8, 7.5 / 8, 4.5 / 8, 3.5 / 8};
  double mean = 0;
  for (int b = 0; b < 32; ++b) {
    mean += lut.entries[Lut5D::index(2 + ((b >> 4) & 1), 0 + ((b >> 3) & 1), 7 + ((b >> 2) & 1),
                                     4 + ((b >> 1) & 1), 3 + (b & 1))] / 32.0;
  }
  EXPECT_NEAR(lookup_5d(lut, c), mean, 1e-12);
}

TEST(Lut5D, MatchesNaiveOracle) {
  const Lut5D lut = random_lut5(8);
  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    const Coord5 c = random_coord(rng);
    EXPECT_NEAR(lookup_5d(lut, c), naive_lookup(lut, c), 1e-12);
  }
  EXPECT_NEAR(lookup_5d(lut, Coord5{1, 1, 1, 1, 1}), lut.entries.back(), 1e-15);
  EXPECT_NEAR(lookup_5d(lut, Coord5{-1, 2, 0.3, 0.3, 0.3}), naive_lookup(lut, Coord5{0, 1, 0.3, 0.3, 0.3}), 1e-12);
}

TEST(Lut5D, CornerWeightsSumToOneAndFollowBitOrder) {
  Rng rng(10);
  const Cell5 cell = locate_5d(random_coord(rng));
  const auto w = corner_weights(cell);
  double s = 0;
  for (double v : w) {
    EXPECT_GE(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_EQ(corner_index(cell, 0), cell.origin);
  EXPECT_EQ(corner_index(cell, 16), cell.origin + kLut5DStride[0]);
  EXPECT_EQ(corner_index(cell, 1), cell.origin + 1);
}

TEST(Lut5D, BackwardMatchesFiniteDifferences) {
  const Lut5D lut = random_lut5(11);
  Rng rng(12);
  for (int t = 0; t < 10; ++t) {
    const Coord5 c = random_coord(rng);
    const Lut5DBackward g = lookup_5d_backward(lut, c, 2.0);
    for (int k = 0; k < 32; ++k) {
      Lut5D a = lut, b = lut;
      a.entries[g.entry[k]] += 1e-6;
      b.entries[g.entry[k]] -= 1e-6;
      const double num = 2.0 * (lookup_5d(a, c) - lookup_5d(b, c)) / 2e-6;
      EXPECT_NEAR(g.grad[k], num, 1e-7);
    }
    for (int d = 0; d < 5; ++d) {
      Coord5 a = c, b = c;
      a[d] += 1e-7;
      b[d] -= 1e-7;
      const double num = 2.0 * (lookup_5d(lut, a) - lookup_5d(lut, b)) / 2e-7;
      EXPECT_LT(fktest::rel_err(g.coord_grad[d], num), 1e-5);
    }
  }
  const Lut5DBackward out = lookup_5d_backward(lut, Coord5{1.3, 0.5, 0.5, 0.5, -0.2}, 1.0);
  EXPECT_EQ(out.coord_grad[0], 0.0);
  EXPECT_EQ(out.coord_grad[4], 0.0);
}

TEST(Coords, PlanesFollowNeighbourAndGradientDefinitions) {
  CasImage cas;
  cas.lum = fktest::random_plane(6, 5, 13);
  cas.fringe = GrayBuf(6, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x) cas.fringe.at(x, y) = 0.1f * x - 0.05f * y;
  cas.ortho = GrayBuf(6, 5);
  cas.m = Mat3::identity();
  const CoordNorm norm{0.0, 1.0, 0.5};
  const LutCoords c = build_coords(cas, norm);
  EXPECT_FLOAT_EQ(c.lum().at(3, 2), cas.lum.at(3, 2));
  EXPECT_FLOAT_EQ(c.lum_left().at(3, 2), cas.lum.at(2, 2));
  EXPECT_FLOAT_EQ(c.lum_left().at(0, 2), cas.lum.at(0, 2));
  EXPECT_FLOAT_EQ(c.lum_top().at(3, 2), cas.lum.at(3, 1));
  // Interior: gx = 0.1, gy = -0.05, mapped by 0.5 + g / 1.0.
  EXPECT_NEAR(c.grad_x().at(3, 2), 0.6, 1e-6);
  EXPECT_NEAR(c.grad_y().at(3, 2), 0.45, 1e-6);
  // Replicate border halves the central difference.
  EXPECT_NEAR(c.grad_x().at(0, 2), 0.55, 1e-6);
}

TEST(Coords, InvalidNormRejected) {
  EXPECT_THROW((CoordNorm{0.5, 0.5, 1.0}.validate()), Error);
  EXPECT_THROW((CoordNorm{0.0, 1.0, 0.0}.validate()), Error);
}

TEST(Smoothness, IdentityTablesValue) {
  const SmoothnessLoss s = smoothness_loss(Lut1D::identity(), Lut5D::identity());
  EXPECT_NEAR(s.term_1d, 0.0, 1e-20);
  // 8 steps of 1/8 along the luminance axis for each of 9^4 lines.
  EXPECT_NEAR(s.term_5d, 8.0 * 6561.0 / 64.0, 1e-9);
  EXPECT_NEAR(s.value, 820.125, 1e-9);
}

TEST(Smoothness, GradientMatchesFiniteDifferences) {
  Lut1D lut1 = Lut1D::identity();
  Rng rng(14);
  for (double& v : lut1.entries) v += 0.01 * rng.normal();
  Lut5D lut5 = random_lut5(15);
  const SmoothnessLoss s = smoothness_loss(lut1, lut5);
  for (int k : {0, 1, 500, 1022, 1023}) {
    Lut1D a = lut1, b = lut1;
    a.entries[k] += 1e-5;
    b.entries[k] -= 1e-5;
    const double num = (smoothness_loss(a, lut5).value - smoothness_loss(b, lut5).value) / 2e-5;
    EXPECT_LT(fktest::rel_err(s.grad_1d[k], num), 1e-4) << k;
  }
  for (std::size_t i : {std::size_t{0}, std::size_t{12345}, kLut5DSize - 1}) {
    Lut5D a = lut5, b = lut5;
    a.entries[i] += 1e-5;
    b.entries[i] -= 1e-5;
    const double num = (smoothness_loss(lut1, a).value - smoothness_loss(lut1, b).value) / 2e-5;
    EXPECT_LT(fktest::rel_err(s.grad_5d[i], num), 1e-4) << i;
  }
}
