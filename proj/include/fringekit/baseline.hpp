#pragma once

#include "fringekit/image.hpp"

namespace fringekit {

struct HeuristicParams {
  double tau_edge = 0.15;  // fraction of the maximum luma Sobel magnitude
  int near_radius = 4;     // Chebyshev distance to the nearest edge pixel
  double delta = 0.08;     // required margin of R and B over G
  double strength = 1.0;

  void validate() const;
};

/// Flags pixels with R > G + delta and B > G + delta that lie within
/// near_radius of a strong luma edge. Output is {0,1}.
GrayBuf heuristic_detect(const ImageBuf& img, const HeuristicParams& params = {});

/// Pulls flagged pixels toward their luma: c' = y + (1 - strength)(c - y).
ImageBuf heuristic_correct(const ImageBuf& img, const GrayBuf& mask, double strength);

inline ImageBuf heuristic_defringe(const ImageBuf& img, const HeuristicParams& params = {}) {
  return heuristic_correct(img, heuristic_detect(img, params), params.strength);
}

}  // namespace fringekit
