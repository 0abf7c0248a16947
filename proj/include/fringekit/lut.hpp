#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fringekit/cas.hpp"
#include "fringekit/image.hpp"

namespace fringekit {

inline constexpr int kLut1DSize = 1024;
inline constexpr int kLut5DRes = 9;
inline constexpr int kLut5DDims = 5;
inline constexpr std::size_t kLut5DSize = 59049;  // 9^5
inline constexpr int kLut5DCorners = 32;

/// 1024-entry curve over [lo, hi]. Entries are stored normalized: an input x
/// maps to t = (x - lo) / (hi - lo), and the interpolated entry e maps back
/// to lo + (hi - lo) * e.
struct Lut1D {
  std::vector<double> entries;
  double lo = 0.0;
  double hi = 1.0;

  static Lut1D identity(double lo = 0.0, double hi = 1.0);
  bool operator==(const Lut1D&) const = default;
};

/// Dense 9^5 grid over the unit hypercube, axis 0 slowest.
struct Lut5D {
  std::vector<double> entries;

  static Lut5D identity();
  static std::size_t index(int i0, int i1, int i2, int i3, int i4) {
    return static_cast<std::size_t>((((i0 * kLut5DRes + i1) * kLut5DRes + i2) * kLut5DRes + i3) * kLut5DRes + i4);
  }
  bool operator==(const Lut5D&) const = default;
};

/// Stride of axis d in Lut5D::entries.
inline constexpr std::array<std::size_t, kLut5DDims> kLut5DStride{6561, 729, 81, 9, 1};

/// Maps CAS values onto the unit coordinates fed to the 5D table.
struct CoordNorm {
  double lum_lo = 0.0;
  double lum_hi = 1.0;
  double g_max = 1.0;

  double lum_to_unit(double v) const { return (v - lum_lo) / (lum_hi - lum_lo); }
  double grad_to_unit(double g) const { return 0.5 + g / (2.0 * g_max); }
  void validate() const;
  bool operator==(const CoordNorm&) const = default;
};

/// Five unit-interval planes: lum at p, lum at left, lum at top, and the
/// central-difference fringe gradients along x and y.
struct LutCoords {
  std::array<GrayBuf, kLut5DDims> planes;

  const GrayBuf& lum() const { return planes[0]; }
  const GrayBuf& lum_left() const { return planes[1]; }
  const GrayBuf& lum_top() const { return planes[2]; }
  const GrayBuf& grad_x() const { return planes[3]; }
  const GrayBuf& grad_y() const { return planes[4]; }
};

LutCoords build_coords(const CasImage& cas, const CoordNorm& norm);

double lookup_1d(const Lut1D& lut, double x);
GrayBuf lookup_1d(const Lut1D& lut, const GrayBuf& plane);

struct Lut1DBackward {
  int lower = 0;        // entries[lower] and entries[lower + 1] participate
  double grad_lower = 0.0;
  double grad_upper = 0.0;
  double input_grad = 0.0;  // zero where x falls outside the domain
};

Lut1DBackward lookup_1d_backward(const Lut1D& lut, double x, double upstream);

using Coord5 = std::array<double, kLut5DDims>;

/// Containing cell of a coordinate: lower corner per axis and fractional part.
/// Coordinates are clamped to [0,1]; a coordinate of exactly 1 lands in the
/// last cell with fraction 1.
struct Cell5 {
  std::array<int, kLut5DDims> base{};
  std::array<double, kLut5DDims> frac{};
  std::size_t origin = 0;  // entry index of the lower corner
};

Cell5 locate_5d(const Coord5& c);

/// Corner k uses bit (4 - d) of k to pick the upper node on axis d, so
/// corner 0 is the lower corner and corner 31 the upper one.
std::array<double, kLut5DCorners> corner_weights(const Cell5& cell);
std::size_t corner_index(const Cell5& cell, int corner);

double lookup_5d(const Lut5D& lut, const Coord5& c);
GrayBuf lookup_5d(const Lut5D& lut, const LutCoords& coords);

struct Lut5DBackward {
  std::array<std::size_t, kLut5DCorners> entry{};
  std::array<double, kLut5DCorners> grad{};
  Coord5 coord_grad{};
};

/// Coordinates outside [0,1] are clamped for the lookup and receive zero
/// coordinate gradient, matching the clamp in build_coords.
Lut5DBackward lookup_5d_backward(const Lut5D& lut, const Coord5& c, double upstream);

struct SmoothnessLoss {
  double value = 0.0;
  double term_1d = 0.0;
  double term_5d = 0.0;
  std::vector<double> grad_1d;
  std::vector<double> grad_5d;
};

/// Squared second differences of the 1D table over interior nodes plus
/// squared forward differences of the 5D table along every axis.
SmoothnessLoss smoothness_loss(const Lut1D& lut1, const Lut5D& lut5);

}  // namespace fringekit
