#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fringekit/image.hpp"

namespace fringekit {

/// 3x3 row-major matrix. For a CAS transform the rows are the luminance,
/// fringe and orthogonal basis vectors.
struct Mat3 {
  std::array<double, 9> m{};

  static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  std::array<double, 3> row(int r) const { return {m[r * 3], m[r * 3 + 1], m[r * 3 + 2]}; }

  double det() const;
  Mat3 transposed() const;
  Mat3 adjugate() const;
  std::array<double, 3> apply(double x, double y, double z) const {
    return {m[0] * x + m[1] * y + m[2] * z, m[3] * x + m[4] * y + m[5] * z, m[6] * x + m[7] * y + m[8] * z};
  }

  bool operator==(const Mat3&) const = default;
};

Mat3 operator*(const Mat3& a, const Mat3& b);

inline constexpr double kSingularDet = 1e-6;

/// Adjugate over determinant; throws SingularTransform when |det| <= 1e-6.
Mat3 inverse(const Mat3& m);

/// Base transform: luminance row (BT.601 luma projected orthogonal to the
/// fringe row, weights still summing to 1), fringe row (0.5, -1, 0.5), and
/// their normalized cross product.
Mat3 base_matrix();

struct CasImage {
  GrayBuf lum;
  GrayBuf fringe;
  GrayBuf ortho;
  Mat3 m;
};

CasImage forward_transform(const ImageBuf& img, const Mat3& m);

/// RGB = M^-1 (lum, fringe, ortho), clamped to [0,1] on emission.
ImageBuf inverse_transform(const CasImage& cas);

// ---------------------------------------------------------------------------
// Image-adaptive predictor

inline constexpr int kFeatureCount = 12;
inline constexpr int kHiddenUnits = 32;
inline constexpr int kMatrixElems = 9;

using Features = std::array<double, kFeatureCount>;

/// [mean R,G,B, std R,G,B, edge density, purple fraction, mean Sobel,
///  max Sobel, mean(R+B-2G), std(R+B-2G)]. Sobel values are in unit-step
/// units; edge density counts magnitudes above 0.1.
Features extract_global_features(const ImageBuf& img);

/// Two-layer perceptron 12 -> 32 (tanh) -> 9, output as a tanh-bounded
/// residual around `base`: M = base + 0.5 * tanh(out).
///
/// Parameters live in one flat vector [W1 (32x12) | b1 | W2 (9x32) | b2] so
/// the optimizer and the model file can treat them uniformly.
struct CasPredictor {
  Features center{};
  Features scale{};
  std::vector<double> params;
  Mat3 base;

  static constexpr std::size_t kW1 = 0;
  static constexpr std::size_t kB1 = kW1 + kHiddenUnits * kFeatureCount;
  static constexpr std::size_t kW2 = kB1 + kHiddenUnits;
  static constexpr std::size_t kB2 = kW2 + kMatrixElems * kHiddenUnits;
  static constexpr std::size_t kParamCount = kB2 + kMatrixElems;

  /// All weights zero, default feature normalization, base_matrix().
  static CasPredictor zero();
  /// W1 drawn N(0, 1/12) from `seed`, everything else zero, so M == base
  /// exactly while the hidden layer still carries signal for training.
  static CasPredictor initialized(std::uint64_t seed);

  double w1(int j, int k) const { return params[kW1 + j * kFeatureCount + k]; }
  double w2(int o, int j) const { return params[kW2 + o * kHiddenUnits + j]; }

  bool operator==(const CasPredictor&) const = default;
};

/// Intermediate activations kept for the backward pass.
struct PredictorCache {
  Features z{};
  std::array<double, kHiddenUnits> hidden{};
  std::array<double, kMatrixElems> out{};
};

Mat3 predict_matrix(const CasPredictor& pred, const Features& features, PredictorCache* cache = nullptr);

/// Accumulates dL/dparams into grad (length kParamCount) given dL/dM.
void predict_matrix_backward(const CasPredictor& pred, const PredictorCache& cache, const Mat3& grad_m,
                             std::span<double> grad);

struct AlignLoss {
  double value = 0.0;
  std::vector<Mat3> grad;  // dL/dM for each matrix in the batch
};

/// (1/B) * sum over the batch of sum over ordered row pairs i != j of
/// (r_i . r_j)^2, with its analytic gradient.
AlignLoss axis_alignment_loss(std::span<const Mat3> batch);

}  // namespace fringekit
