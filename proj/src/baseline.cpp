#include "fringekit/baseline.hpp"

#include <algorithm>

#include "fringekit/color.hpp"
#include "fringekit/filter.hpp"

namespace fringekit {

void HeuristicParams::validate() const {
  if (!(tau_edge > 0.0 && tau_edge < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau_edge must lie in (0,1)");
  if (near_radius < 0) throw Error(ErrorCode::InvalidArgument, "near_radius must be >= 0");
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be >= 0");
  if (!(strength >= 0.0 && strength <= 1.0)) throw Error(ErrorCode::InvalidArgument, "strength must lie in [0,1]");
}

GrayBuf heuristic_detect(const ImageBuf& img, const HeuristicParams& params) {
  require_channels(img, 3, "heuristic_detect");
  params.validate();
  const int w = img.width(), h = img.height();
  GrayBuf mask(w, h, 0.0f);
  if (img.empty()) return mask;

  PlaneD y(w, h);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) y.data()[i] = luma(img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]);
  const auto sobel = sobel_gradients(y);
  const double max_mag = *std::max_element(sobel.mag.data().begin(), sobel.mag.data().end());
  if (max_mag <= 0.0) return mask;

  GrayBuf edges(w, h, 0.0f);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges.data()[i] = sobel.mag.data()[i] > params.tau_edge * max_mag ? 1.0f : 0.0f;
  }
  const GrayBuf near = dilate(edges, params.near_radius);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double r = img.plane(0)[i], g = img.plane(1)[i], b = img.plane(2)[i];
    if (near.data()[i] > 0.0f && r > g + params.delta && b > g + params.delta) mask.data()[i] = 1.0f;
  }
  return mask;
}

ImageBuf heuristic_correct(const ImageBuf& img, const GrayBuf& mask, double strength) {
  require_channels(img, 3, "heuristic_correct");
  if (mask.width() != img.width() || mask.height() != img.height()) {
    throw Error(ErrorCode::ShapeMismatch, "heuristic_correct: mask size differs from image");
  }
  if (!(strength >= 0.0 && strength <= 1.0)) throw Error(ErrorCode::InvalidArgument, "strength must lie in [0,1]");
  ImageBuf out = img;
  const double keep = 1.0 - strength;
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (mask.data()[i] == 0.0f) continue;
    const double y = luma(img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]);
    for (int c = 0; c < 3; ++c) {
      out.plane(c)[i] = static_cast<float>(std::clamp(y + keep * (img.plane(c)[i] - y), 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace fringekit
