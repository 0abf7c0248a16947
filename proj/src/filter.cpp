#include "fringekit/filter.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include "fringekit/parallel.hpp"

namespace fringekit {

namespace {

template <typename T>
Plane<T> blur_rows(const Plane<T>& img, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  const int w = img.width();
  Plane<T> out(w, img.height());
  parallel_for(static_cast<std::size_t>(img.height()), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      auto src = img.row(y);
      auto dst = out.row(y);
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k + r] * src[std::clamp(x + k, 0, w - 1)];
        dst[x] = static_cast<T>(acc);
      }
    }
  });
  return out;
}

template <typename T>
Plane<T> blur_cols(const Plane<T>& img, const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  const int h = img.height();
  Plane<T> out(img.width(), h);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      auto dst = out.row(y);
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) acc += taps[k + r] * img.at(x, std::clamp(y + k, 0, h - 1));
        dst[x] = static_cast<T>(acc);
      }
    }
  });
  return out;
}

}  // namespace

template <typename T>
Plane<T> convolve2d(const Plane<T>& img, const Kernel& kernel) {
  if (kernel.rows % 2 == 0 || kernel.cols % 2 == 0 || kernel.rows <= 0 || kernel.cols <= 0) {
    throw Error(ErrorCode::InvalidArgument, "convolve2d: kernel dimensions must be odd");
  }
  if (kernel.weights.size() != static_cast<std::size_t>(kernel.rows) * kernel.cols) {
    throw Error(ErrorCode::ShapeMismatch, "convolve2d: kernel weight count mismatch");
  }
  const int ry = kernel.rows / 2;
  const int rx = kernel.cols / 2;
  Plane<T> out(img.width(), img.height());
  if (img.empty()) return out;
  parallel_for(static_cast<std::size_t>(img.height()), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        double acc = 0.0;
        for (int ky = -ry; ky <= ry; ++ky) {
          for (int kx = -rx; kx <= rx; ++kx) acc += kernel.at(ky + ry, kx + rx) * img.clamped(x + kx, y + ky);
        }
        out.at(x, y) = static_cast<T>(acc);
      }
    }
  });
  return out;
}

Kernel sobel_kernel_x() { return {3, 3, {-1, 0, 1, -2, 0, 2, -1, 0, 1}}; }
Kernel sobel_kernel_y() { return {3, 3, {-1, -2, -1, 0, 0, 0, 1, 2, 1}}; }

template <typename T>
SobelResult<T> sobel_gradients(const Plane<T>& img) {
  const int w = img.width();
  const int h = img.height();
  SobelResult<T> res{Plane<T>(w, h), Plane<T>(w, h), Plane<T>(w, h)};
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < w; ++x) {
        const double tl = img.clamped(x - 1, y - 1), tc = img.clamped(x, y - 1), tr = img.clamped(x + 1, y - 1);
        const double ml = img.clamped(x - 1, y), mr = img.clamped(x + 1, y);
        const double bl = img.clamped(x - 1, y + 1), bc = img.clamped(x, y + 1), br = img.clamped(x + 1, y + 1);
        const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
        const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
        res.gx.at(x, y) = static_cast<T>(gx);
        res.gy.at(x, y) = static_cast<T>(gy);
        res.mag.at(x, y) = static_cast<T>(std::sqrt(gx * gx + gy * gy));
      }
    }
  });
  return res;
}

std::vector<double> gaussian_kernel1d(double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
    sum += taps[k + radius];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

template <typename T>
Plane<T> gaussian_blur(const Plane<T>& img, double sigma) {
  const auto taps = gaussian_kernel1d(sigma);
  if (img.empty()) return img;
  return blur_cols(blur_rows(img, taps), taps);
}

GrayBuf canny_edges(const GrayBuf& img, double low, double high) {
  if (!(low < high)) throw Error(ErrorCode::InvalidArgument, "canny_edges: low threshold must be below high");
  if (low < 0.0 || high > 1.0) throw Error(ErrorCode::InvalidArgument, "canny_edges: thresholds must lie in [0,1]");
  const int w = img.width();
  const int h = img.height();
  GrayBuf edges(w, h, 0.0f);
  if (img.empty()) return edges;

  const auto smooth = gaussian_blur(plane_cast<double>(img), 1.0);
  const auto grad = sobel_gradients(smooth);

  // 0: strong, 1: weak, 2: none
  std::vector<std::uint8_t> cls(static_cast<std::size_t>(w) * h, 2);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < w; ++x) {
        const double m = grad.mag.at(x, y);
        if (m <= 0.0) continue;
        const double gx = grad.gx.at(x, y);
        const double gy = grad.gy.at(x, y);
        double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
        if (angle < 0.0) angle += 180.0;
        int dx, dy;
        if (angle < 22.5 || angle >= 157.5) {
          dx = 1, dy = 0;
        } else if (angle < 67.5) {
          dx = 1, dy = 1;
        } else if (angle < 112.5) {
          dx = 0, dy = 1;
        } else {
          dx = -1, dy = 1;
        }
        // Strict on the trailing side, inclusive on the leading side, so a
        // symmetric ridge two pixels wide keeps exactly one.
        const double before = grad.mag.clamped(x - dx, y - dy);
        const double after = grad.mag.clamped(x + dx, y + dy);
        if (!(m > before && m >= after)) continue;
        const double norm = m / kSobelUnitStep;
        if (norm >= high) {
          cls[static_cast<std::size_t>(y) * w + x] = 0;
        } else if (norm >= low) {
          cls[static_cast<std::size_t>(y) * w + x] = 1;
        }
      }
    }
  });

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    if (cls[i] != 0) continue;
    edges.data()[i] = 1.0f;
    stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(i % w);
    const int y = static_cast<int>(i / w);
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const int nx = x + ox, ny = y + oy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (cls[j] == 1 && edges.data()[j] == 0.0f) {
          edges.data()[j] = 1.0f;
          stack.push_back(j);
        }
      }
    }
  }
  return edges;
}

GrayBuf dilate(const GrayBuf& mask, int radius) {
  if (radius < 0) throw Error(ErrorCode::InvalidArgument, "dilate: radius must be >= 0");
  const int w = mask.width();
  const int h = mask.height();
  GrayBuf horiz(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == 0.0f) continue;
      for (int k = std::max(0, x - radius); k <= std::min(w - 1, x + radius); ++k) horiz.at(k, y) = 1.0f;
    }
  }
  GrayBuf out(w, h, 0.0f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (horiz.at(x, y) == 0.0f) continue;
      for (int k = std::max(0, y - radius); k <= std::min(h - 1, y + radius); ++k) out.at(x, k) = 1.0f;
    }
  }
  return out;
}

template Plane<float> convolve2d(const Plane<float>&, const Kernel&);
template Plane<double> convolve2d(const Plane<double>&, const Kernel&);
template SobelResult<float> sobel_gradients(const Plane<float>&);
template SobelResult<double> sobel_gradients(const Plane<double>&);
template Plane<float> gaussian_blur(const Plane<float>&, double);
template Plane<double> gaussian_blur(const Plane<double>&, double);

}  // namespace fringekit
