#pragma once

#include <vector>

#include "fringekit/image.hpp"

namespace fringekit {

/// Sobel response of an ideal unit step. Dividing by this maps Sobel
/// magnitudes of unit-interval images onto a scale where a hard 0->1 edge
/// reads 1.0; Canny thresholds and the edge-density feature use that scale.
inline constexpr double kSobelUnitStep = 4.0;

/// Odd-sized correlation kernel, row-major.
struct Kernel {
  int rows = 1;
  int cols = 1;
  std::vector<double> weights{1.0};

  double at(int r, int c) const { return weights[static_cast<std::size_t>(r) * cols + c]; }
};

/// Same-size correlation (kernel is not flipped) with replicate border.
template <typename T>
Plane<T> convolve2d(const Plane<T>& img, const Kernel& kernel);

template <typename T>
struct SobelResult {
  Plane<T> gx;
  Plane<T> gy;
  Plane<T> mag;
};

template <typename T>
SobelResult<T> sobel_gradients(const Plane<T>& img);

Kernel sobel_kernel_x();
Kernel sobel_kernel_y();

/// Normalized 1D Gaussian taps, radius ceil(3*sigma).
std::vector<double> gaussian_kernel1d(double sigma);

template <typename T>
Plane<T> gaussian_blur(const Plane<T>& img, double sigma);

/// Binary Canny edge map. low/high are thresholds on Sobel magnitude divided
/// by kSobelUnitStep, after a sigma=1 Gaussian presmooth. Non-maximum
/// suppression quantizes gradient direction to 4 bins; hysteresis links weak
/// pixels to strong ones through 8-connectivity.
GrayBuf canny_edges(const GrayBuf& img, double low, double high);

/// Square structuring element of side 2*radius+1. Any nonzero input counts as
/// set; output is {0,1}.
GrayBuf dilate(const GrayBuf& mask, int radius);

}  // namespace fringekit
