#include "fringekit/color.hpp"

#include <algorithm>
#include <cmath>

#include "fringekit/parallel.hpp"

namespace fringekit {

namespace {

constexpr double kKb = kLumaB;
constexpr double kKr = kLumaR;
constexpr double kKg = kLumaG;

// sRGB primaries -> XYZ, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kEps = 216.0 / 24389.0;
  constexpr double kKappa = 24389.0 / 27.0;
  return t > kEps ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

template <typename Fn>
ImageBuf map_pixels3(const ImageBuf& img, const char* what, Fn fn) {
  require_channels(img, 3, what);
  ImageBuf out(img.width(), img.height(), 3);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto o0 = out.plane(0), o1 = out.plane(1), o2 = out.plane(2);
  parallel_for(img.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto v = fn(r[i], g[i], b[i]);
      o0[i] = static_cast<float>(std::clamp(v[0], 0.0, 1.0));
      o1[i] = static_cast<float>(std::clamp(v[1], 0.0, 1.0));
      o2[i] = static_cast<float>(std::clamp(v[2], 0.0, 1.0));
    }
  });
  return out;
}

}  // namespace

Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx > 0.0) out.s = delta / mx;
  if (delta <= 0.0) return out;
  double h;
  if (mx == r) {
    h = (g - b) / delta;
    if (h < 0.0) h += 6.0;
  } else if (mx == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  out.h = h / 6.0;
  if (out.h >= 1.0) out.h -= 1.0;
  return out;
}

YCbCr rgb_to_ycbcr(double r, double g, double b) {
  const double y = luma(r, g, b);
  return {y, 0.5 + (b - y) / (2.0 * (1.0 - kKb)), 0.5 + (r - y) / (2.0 * (1.0 - kKr))};
}

std::array<double, 3> ycbcr_to_rgb(double y, double cb, double cr) {
  const double pb = cb - 0.5;
  const double pr = cr - 0.5;
  const double r = y + 2.0 * (1.0 - kKr) * pr;
  const double b = y + 2.0 * (1.0 - kKb) * pb;
  const double g = (y - kKr * r - kKb * b) / kKg;
  return {r, g, b};
}

Lab srgb_to_lab(double r, double g, double b) {
  const double lr = srgb_to_linear(r);
  const double lg = srgb_to_linear(g);
  const double lb = srgb_to_linear(b);
  const double x = kRgbToXyz[0][0] * lr + kRgbToXyz[0][1] * lg + kRgbToXyz[0][2] * lb;
  const double y = kRgbToXyz[1][0] * lr + kRgbToXyz[1][1] * lg + kRgbToXyz[1][2] * lb;
  const double z = kRgbToXyz[2][0] * lr + kRgbToXyz[2][1] * lg + kRgbToXyz[2][2] * lb;
  const double fx = lab_f(x / kWhiteX);
  const double fy = lab_f(y / kWhiteY);
  const double fz = lab_f(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

GrayBuf to_grayscale(const ImageBuf& img) {
  require_channels(img, 3, "to_grayscale");
  GrayBuf out(img.width(), img.height());
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto o = out.data();
  parallel_for(img.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      o[i] = static_cast<float>(std::clamp(luma(r[i], g[i], b[i]), 0.0, 1.0));
    }
  });
  return out;
}

ImageBuf rgb_to_hsv(const ImageBuf& img) {
  return map_pixels3(img, "rgb_to_hsv", [](double r, double g, double b) {
    const Hsv h = rgb_to_hsv(r, g, b);
    return std::array<double, 3>{h.h, h.s, h.v};
  });
}

ImageBuf rgb_to_ycbcr(const ImageBuf& img) {
  return map_pixels3(img, "rgb_to_ycbcr", [](double r, double g, double b) {
    const YCbCr v = rgb_to_ycbcr(r, g, b);
    return std::array<double, 3>{v.y, v.cb, v.cr};
  });
}

ImageBuf ycbcr_to_rgb(const ImageBuf& img) {
  return map_pixels3(img, "ycbcr_to_rgb", [](double y, double cb, double cr) { return ycbcr_to_rgb(y, cb, cr); });
}

LabImage rgb_to_lab(const ImageBuf& img) {
  require_channels(img, 3, "rgb_to_lab");
  LabImage out{PlaneD(img.width(), img.height()), PlaneD(img.width(), img.height()),
               PlaneD(img.width(), img.height())};
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  parallel_for(img.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Lab lab = srgb_to_lab(r[i], g[i], b[i]);
      out.l.data()[i] = lab.l;
      out.a.data()[i] = lab.a;
      out.b.data()[i] = lab.b;
    }
  });
  return out;
}

}  // namespace fringekit
