#include "fringekit/lut.hpp"

#include <algorithm>
#include <cmath>

#include "fringekit/parallel.hpp"

namespace fringekit {

namespace {

// Snaps positions that are within rounding noise of a grid node so stored
// entries come back bit-exact.
double snap(double pos) {
  const double r = std::nearbyint(pos);
  return std::abs(pos - r) < 1e-9 ? r : pos;
}

struct Cell1 {
  int k = 0;
  double f = 0.0;
};

Cell1 locate_1d(double t) {
  const double pos = snap(std::clamp(t, 0.0, 1.0) * (kLut1DSize - 1));
  Cell1 c;
  c.k = std::min(static_cast<int>(pos), kLut1DSize - 2);
  c.f = pos - c.k;
  return c;
}

void check_lut1(const Lut1D& lut) {
  if (lut.entries.size() != static_cast<std::size_t>(kLut1DSize)) {
    throw Error(ErrorCode::InvalidArgument, "Lut1D must hold 1024 entries");
  }
  if (!(lut.hi > lut.lo)) throw Error(ErrorCode::InvalidArgument, "Lut1D domain is empty");
}

void check_lut5(const Lut5D& lut) {
  if (lut.entries.size() != kLut5DSize) throw Error(ErrorCode::InvalidArgument, "Lut5D must hold 9^5 entries");
}

}  // namespace

Lut1D Lut1D::identity(double lo, double hi) {
  Lut1D lut;
  lut.lo = lo;
  lut.hi = hi;
  lut.entries.resize(kLut1DSize);
  for (int k = 0; k < kLut1DSize; ++k) lut.entries[k] = static_cast<double>(k) / (kLut1DSize - 1);
  return lut;
}

Lut5D Lut5D::identity() {
  Lut5D lut;
  lut.entries.resize(kLut5DSize);
  for (std::size_t i = 0; i < kLut5DSize; ++i) {
    lut.entries[i] = static_cast<double>(i / kLut5DStride[0]) / (kLut5DRes - 1);
  }
  return lut;
}

void CoordNorm::validate() const {
  if (!(lum_hi > lum_lo)) throw Error(ErrorCode::InvalidArgument, "luminance range is empty");
  if (!(g_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "g_max must be positive");
}

LutCoords build_coords(const CasImage& cas, const CoordNorm& norm) {
  norm.validate();
  const int w = cas.lum.width(), h = cas.lum.height();
  if (!cas.fringe.same_shape(cas.lum)) throw Error(ErrorCode::ShapeMismatch, "build_coords: CAS planes differ in size");
  LutCoords out;
  for (auto& p : out.planes) p = GrayBuf(w, h);
  auto unit = [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); };
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < w; ++x) {
        out.planes[0].at(x, y) = unit(norm.lum_to_unit(cas.lum.at(x, y)));
        out.planes[1].at(x, y) = unit(norm.lum_to_unit(cas.lum.clamped(x - 1, y)));
        out.planes[2].at(x, y) = unit(norm.lum_to_unit(cas.lum.clamped(x, y - 1)));
        const double gx = 0.5 * (static_cast<double>(cas.fringe.clamped(x + 1, y)) - cas.fringe.clamped(x - 1, y));
        const double gy = 0.5 * (static_cast<double>(cas.fringe.clamped(x, y + 1)) - cas.fringe.clamped(x, y - 1));
        out.planes[3].at(x, y) = unit(norm.grad_to_unit(gx));
        out.planes[4].at(x, y) = unit(norm.grad_to_unit(gy));
      }
    }
  });
  return out;
}

double lookup_1d(const Lut1D& lut, double x) {
  check_lut1(lut);
  const Cell1 c = locate_1d((x - lut.lo) / (lut.hi - lut.lo));
  const double e = (1.0 - c.f) * lut.entries[c.k] + c.f * lut.entries[c.k + 1];
  return lut.lo + (lut.hi - lut.lo) * e;
}

GrayBuf lookup_1d(const Lut1D& lut, const GrayBuf& plane) {
  check_lut1(lut);
  GrayBuf out(plane.width(), plane.height());
  auto src = plane.data();
  auto dst = out.data();
  parallel_for(src.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) dst[i] = static_cast<float>(lookup_1d(lut, src[i]));
  });
  return out;
}

Lut1DBackward lookup_1d_backward(const Lut1D& lut, double x, double upstream) {
  check_lut1(lut);
  const double t = (x - lut.lo) / (lut.hi - lut.lo);
  const Cell1 c = locate_1d(t);
  // The domain scale cancels: output = lo + (hi - lo) * e(t(x)).
  const double scaled = upstream * (lut.hi - lut.lo);
  Lut1DBackward out;
  out.lower = c.k;
  out.grad_lower = scaled * (1.0 - c.f);
  out.grad_upper = scaled * c.f;
  if (t >= 0.0 && t <= 1.0) {
    out.input_grad = upstream * (lut.entries[c.k + 1] - lut.entries[c.k]) * (kLut1DSize - 1);
  }
  return out;
}

Cell5 locate_5d(const Coord5& c) {
  Cell5 cell;
  for (int d = 0; d < kLut5DDims; ++d) {
    const double pos = snap(std::clamp(c[d], 0.0, 1.0) * (kLut5DRes - 1));
    cell.base[d] = std::min(static_cast<int>(pos), kLut5DRes - 2);
    cell.frac[d] = pos - cell.base[d];
    cell.origin += static_cast<std::size_t>(cell.base[d]) * kLut5DStride[d];
  }
  return cell;
}

std::array<double, kLut5DCorners> corner_weights(const Cell5& cell) {
  std::array<double, kLut5DCorners> w{};
  w[0] = 1.0;
  // Expand one axis at a time; after axis d the first 2^(d+1) slots hold the
  // partial products, ordered so bit (4 - d) selects the upper node.
  int n = 1;
  for (int d = 0; d < kLut5DDims; ++d) {
    const double f = cell.frac[d];
    for (int k = n - 1; k >= 0; --k) {
      w[2 * k + 1] = w[k] * f;
      w[2 * k] = w[k] * (1.0 - f);
    }
    n *= 2;
  }
  return w;
}

std::size_t corner_index(const Cell5& cell, int corner) {
  std::size_t idx = cell.origin;
  for (int d = 0; d < kLut5DDims; ++d) {
    if (corner & (1 << (kLut5DDims - 1 - d))) idx += kLut5DStride[d];
  }
  return idx;
}

double lookup_5d(const Lut5D& lut, const Coord5& c) {
  check_lut5(lut);
  const Cell5 cell = locate_5d(c);
  const auto w = corner_weights(cell);
  const double* e = lut.entries.data();
  double acc = 0.0;
  for (int k = 0; k < kLut5DCorners; ++k) acc += w[k] * e[corner_index(cell, k)];
  return acc;
}

GrayBuf lookup_5d(const Lut5D& lut, const LutCoords& coords) {
  check_lut5(lut);
  const GrayBuf& ref = coords.planes[0];
  GrayBuf out(ref.width(), ref.height());
  auto dst = out.data();
  parallel_for(dst.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Coord5 c;
      for (int d = 0; d < kLut5DDims; ++d) c[d] = coords.planes[d].data()[i];
      dst[i] = static_cast<float>(lookup_5d(lut, c));
    }
  });
  return out;
}

Lut5DBackward lookup_5d_backward(const Lut5D& lut, const Coord5& c, double upstream) {
  check_lut5(lut);
  const Cell5 cell = locate_5d(c);
  const auto w = corner_weights(cell);
  Lut5DBackward out;
  for (int k = 0; k < kLut5DCorners; ++k) {
    out.entry[k] = corner_index(cell, k);
    out.grad[k] = upstream * w[k];
  }
  // d/dc_d: replace the axis-d factor by -1 or +1 (times the grid scale).
  for (int d = 0; d < kLut5DDims; ++d) {
    const int bit = 1 << (kLut5DDims - 1 - d);
    double slope = 0.0;
    for (int k = 0; k < kLut5DCorners; ++k) {
      double rest = 1.0;
      for (int e = 0; e < kLut5DDims; ++e) {
        if (e == d) continue;
        const bool up = (k & (1 << (kLut5DDims - 1 - e))) != 0;
        rest *= up ? cell.frac[e] : 1.0 - cell.frac[e];
      }
      const double v = lut.entries[out.entry[k]];
      slope += (k & bit) ? rest * v : -rest * v;
    }
    const bool inside = c[d] >= 0.0 && c[d] <= 1.0;
    out.coord_grad[d] = inside ? upstream * slope * (kLut5DRes - 1) : 0.0;
  }
  return out;
}

SmoothnessLoss smoothness_loss(const Lut1D& lut1, const Lut5D& lut5) {
  check_lut1(lut1);
  check_lut5(lut5);
  SmoothnessLoss out;
  out.grad_1d.assign(kLut1DSize, 0.0);
  out.grad_5d.assign(kLut5DSize, 0.0);

  const auto& a = lut1.entries;
  for (int k = 1; k + 1 < kLut1DSize; ++k) {
    const double d2 = a[k - 1] - 2.0 * a[k] + a[k + 1];
    out.term_1d += d2 * d2;
    out.grad_1d[k - 1] += 2.0 * d2;
    out.grad_1d[k] -= 4.0 * d2;
    out.grad_1d[k + 1] += 2.0 * d2;
  }

  const auto& e = lut5.entries;
  for (std::size_t i = 0; i < kLut5DSize; ++i) {
    std::size_t rem = i;
    for (int d = 0; d < kLut5DDims; ++d) {
      const std::size_t coord = rem / kLut5DStride[d];
      rem %= kLut5DStride[d];
      if (coord + 1 >= static_cast<std::size_t>(kLut5DRes)) continue;
      const std::size_t j = i + kLut5DStride[d];
      const double diff = e[j] - e[i];
      out.term_5d += diff * diff;
      out.grad_5d[j] += 2.0 * diff;
      out.grad_5d[i] -= 2.0 * diff;
    }
  }
  out.value = out.term_1d + out.term_5d;
  return out;
}

}  // namespace fringekit
