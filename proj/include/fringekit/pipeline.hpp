#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fringekit/cas.hpp"
#include "fringekit/image.hpp"
#include "fringekit/lut.hpp"

namespace fringekit {

/// Fringe channel range covered by the 1D table. The base fringe row maps
/// unit RGB into [-1, 1]; the margin leaves room for the learned residual.
inline constexpr double kFringeDomain = 1.5;

struct LossWeights {
  double l1 = 1.0;
  double perceptual = 0.1;
  double chroma = 1.0;
  double smooth = 1e-4;
  double align = 1e-3;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

struct Model {
  CasPredictor predictor;
  Lut5D lut5;
  Lut1D lut1;
  CoordNorm norm;
  LossWeights weights;

  /// Predictor with random first layer and zero output layer, identity
  /// tables: the composed correction is a no-op.
  static Model identity(std::uint64_t seed = 0);
  void validate() const;
  bool operator==(const Model&) const = default;
};

/// Full correction with [0,1] clamping on emission. Throws
/// SingularTransform if the predicted matrix cannot be inverted.
ImageBuf correct_image(const Model& model, const ImageBuf& img);

using RgbPlanesD = std::array<PlaneD, 3>;

RgbPlanesD to_planes_d(const ImageBuf& img);

/// Training-time forward pass: same math as correct_image in double
/// precision, unclamped, with the near-singular guard instead of an error.
RgbPlanesD forward_unclamped(const Model& model, const ImageBuf& img);

struct LossBreakdown {
  double l1 = 0.0;
  double perceptual_y = 0.0;
  double chroma = 0.0;
  double smooth = 0.0;
  double align = 0.0;
  double total = 0.0;
};

/// Recomputes total from the components.
void combine_total(LossBreakdown& loss, const LossWeights& w);

struct StructuralLoss {
  double value = 0.0;
  PlaneD grad;  // d value / d y_out
};

/// Mean |Sobel magnitude difference| plus 0.1 x mean |difference of 2x2 box
/// downsampled planes| (odd trailing rows/columns are dropped).
StructuralLoss structural_perceptual_y(const PlaneD& y_out, const PlaneD& y_gt);
StructuralLoss structural_perceptual_y(const GrayBuf& y_out, const GrayBuf& y_gt);

struct ReconstructionLoss {
  double l1 = 0.0;
  double perceptual_y = 0.0;
  double chroma = 0.0;
  RgbPlanesD grad;  // gradient of the weighted reconstruction terms w.r.t. out
};

ReconstructionLoss reconstruction_loss(const RgbPlanesD& out, const RgbPlanesD& gt, const LossWeights& w);

struct ModelGrad {
  std::vector<double> predictor;
  std::vector<double> lut5;
  std::vector<double> lut1;

  static ModelGrad zeros();
  void add(const ModelGrad& other);
};

struct TrainSample {
  const ImageBuf* input = nullptr;
  const ImageBuf* target = nullptr;
};

struct BatchLoss {
  LossBreakdown loss;
  ModelGrad grad;
  std::vector<Mat3> matrices;
  int guarded = 0;  // samples whose matrix needed the singularity guard
};

/// Batch loss with reconstruction terms averaged over samples, the
/// alignment term over the batch matrices and one smoothness term for the
/// tables. Gradients cover every trainable parameter when want_grad is set.
BatchLoss compute_loss(const Model& model, std::span<const TrainSample> batch, bool want_grad = true);

}  // namespace fringekit
