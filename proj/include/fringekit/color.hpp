#pragma once

#include <array>

#include "fringekit/image.hpp"

namespace fringekit {

// BT.601 luma weights; also the weights of the full-range YCbCr Y plane.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma(double r, double g, double b) { return kLumaR * r + kLumaG * g + kLumaB * b; }

struct Hsv {
  double h;  // [0,1) representing [0,360) degrees; 0 for achromatic pixels
  double s;
  double v;
};

struct YCbCr {
  double y;
  double cb;  // offset by 0.5
  double cr;  // offset by 0.5
};

struct Lab {
  double l;
  double a;
  double b;
};

/// Inclusive hue interval in degrees. lo > hi wraps through 0.
struct HueBand {
  double lo_deg;
  double hi_deg;

  bool contains_unit_hue(double h) const {
    const double deg = h * 360.0;
    if (lo_deg <= hi_deg) return deg >= lo_deg && deg <= hi_deg;
    return deg >= lo_deg || deg <= hi_deg;
  }
};

inline constexpr HueBand kPurpleBand{250.0, 330.0};
inline constexpr HueBand kGreenBand{80.0, 160.0};

Hsv rgb_to_hsv(double r, double g, double b);
YCbCr rgb_to_ycbcr(double r, double g, double b);
std::array<double, 3> ycbcr_to_rgb(double y, double cb, double cr);
/// sRGB (gamma encoded, [0,1]) -> CIE L*a*b*, D65 white.
Lab srgb_to_lab(double r, double g, double b);

GrayBuf to_grayscale(const ImageBuf& img);
ImageBuf rgb_to_hsv(const ImageBuf& img);
ImageBuf rgb_to_ycbcr(const ImageBuf& img);
ImageBuf ycbcr_to_rgb(const ImageBuf& img);

struct LabImage {
  PlaneD l;
  PlaneD a;
  PlaneD b;
};
LabImage rgb_to_lab(const ImageBuf& img);

}  // namespace fringekit
