#include "fringekit/cas.hpp"

#include <algorithm>
#include <cmath>

#include "fringekit/color.hpp"
#include "fringekit/filter.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/rng.hpp"

namespace fringekit {

double Mat3::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Mat3 Mat3::transposed() const { return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}}; }

Mat3 Mat3::adjugate() const {
  return {{
      m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
      m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
      m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3],
  }};
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    }
  }
  return out;
}

Mat3 inverse(const Mat3& m) {
  const double d = m.det();
  if (!(std::abs(d) > kSingularDet)) {
    throw Error(ErrorCode::SingularTransform, "transform matrix is singular (|det| = " + std::to_string(std::abs(d)) + ")");
  }
  Mat3 adj = m.adjugate();
  for (auto& v : adj.m) v /= d;
  return adj;
}

Mat3 base_matrix() {
  const std::array<double, 3> fringe{0.5, -1.0, 0.5};
  std::array<double, 3> lum{kLumaR, kLumaG, kLumaB};
  const double proj = (lum[0] * fringe[0] + lum[1] * fringe[1] + lum[2] * fringe[2]) / 1.5;
  for (int i = 0; i < 3; ++i) lum[i] -= proj * fringe[i];
  std::array<double, 3> ortho{
      lum[1] * fringe[2] - lum[2] * fringe[1],
      lum[2] * fringe[0] - lum[0] * fringe[2],
      lum[0] * fringe[1] - lum[1] * fringe[0],
  };
  const double n = std::sqrt(ortho[0] * ortho[0] + ortho[1] * ortho[1] + ortho[2] * ortho[2]);
  for (auto& v : ortho) v /= n;
  return {{lum[0], lum[1], lum[2], fringe[0], fringe[1], fringe[2], ortho[0], ortho[1], ortho[2]}};
}

CasImage forward_transform(const ImageBuf& img, const Mat3& m) {
  require_channels(img, 3, "forward_transform");
  const int w = img.width(), h = img.height();
  CasImage cas{GrayBuf(w, h), GrayBuf(w, h), GrayBuf(w, h), m};
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  auto l = cas.lum.data(), f = cas.fringe.data(), o = cas.ortho.data();
  parallel_for(img.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto v = m.apply(r[i], g[i], b[i]);
      l[i] = static_cast<float>(v[0]);
      f[i] = static_cast<float>(v[1]);
      o[i] = static_cast<float>(v[2]);
    }
  });
  return cas;
}

ImageBuf inverse_transform(const CasImage& cas) {
  if (!cas.lum.same_shape(cas.fringe) || !cas.lum.same_shape(cas.ortho)) {
    throw Error(ErrorCode::ShapeMismatch, "inverse_transform: CAS planes differ in size");
  }
  const Mat3 inv = inverse(cas.m);
  const int w = cas.lum.width(), h = cas.lum.height();
  ImageBuf out(w, h, 3);
  auto l = cas.lum.data(), f = cas.fringe.data(), o = cas.ortho.data();
  auto r = out.plane(0), g = out.plane(1), b = out.plane(2);
  parallel_for(out.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto v = inv.apply(l[i], f[i], o[i]);
      r[i] = static_cast<float>(std::clamp(v[0], 0.0, 1.0));
      g[i] = static_cast<float>(std::clamp(v[1], 0.0, 1.0));
      b[i] = static_cast<float>(std::clamp(v[2], 0.0, 1.0));
    }
  });
  return out;
}

Features extract_global_features(const ImageBuf& img) {
  require_channels(img, 3, "extract_global_features");
  Features f{};
  const std::size_t n = img.pixel_count();
  if (n == 0) return f;
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);

  std::array<double, 3> sum{}, sum2{};
  double chroma_sum = 0.0, chroma_sum2 = 0.0;
  std::size_t purple = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px[3] = {r[i], g[i], b[i]};
    for (int c = 0; c < 3; ++c) {
      sum[c] += px[c];
      sum2[c] += px[c] * px[c];
    }
    const double chroma = px[0] + px[2] - 2.0 * px[1];
    chroma_sum += chroma;
    chroma_sum2 += chroma * chroma;
    const Hsv hsv = rgb_to_hsv(px[0], px[1], px[2]);
    if (hsv.s > 0.25 && kPurpleBand.contains_unit_hue(hsv.h)) ++purple;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int c = 0; c < 3; ++c) {
    f[c] = sum[c] * inv_n;
    f[3 + c] = std::sqrt(std::max(0.0, sum2[c] * inv_n - f[c] * f[c]));
  }

  const auto sobel = sobel_gradients(plane_cast<double>(to_grayscale(img)));
  std::size_t edges = 0;
  double mag_sum = 0.0, mag_max = 0.0;
  for (double m : sobel.mag.data()) {
    const double u = m / kSobelUnitStep;
    if (u > 0.1) ++edges;
    mag_sum += u;
    mag_max = std::max(mag_max, u);
  }
  f[6] = static_cast<double>(edges) * inv_n;
  f[7] = static_cast<double>(purple) * inv_n;
  f[8] = mag_sum * inv_n;
  f[9] = mag_max;
  f[10] = chroma_sum * inv_n;
  f[11] = std::sqrt(std::max(0.0, chroma_sum2 * inv_n - f[10] * f[10]));
  return f;
}

CasPredictor CasPredictor::zero() {
  CasPredictor p;
  p.center = {0.5, 0.5, 0.5, 0.2, 0.2, 0.2, 0.1, 0.02, 0.05, 0.5, 0.0, 0.1};
  p.scale = {0.25, 0.25, 0.25, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05, 0.25, 0.2, 0.1};
  p.params.assign(kParamCount, 0.0);
  p.base = base_matrix();
  return p;
}

CasPredictor CasPredictor::initialized(std::uint64_t seed) {
  CasPredictor p = zero();
  Rng rng(seed);
  const double sd = 1.0 / std::sqrt(static_cast<double>(kFeatureCount));
  for (std::size_t i = kW1; i < kB1; ++i) p.params[i] = sd * rng.normal();
  return p;
}

Mat3 predict_matrix(const CasPredictor& pred, const Features& features, PredictorCache* cache) {
  PredictorCache local;
  PredictorCache& c = cache ? *cache : local;
  for (int k = 0; k < kFeatureCount; ++k) c.z[k] = (features[k] - pred.center[k]) / pred.scale[k];
  for (int j = 0; j < kHiddenUnits; ++j) {
    double a = pred.params[CasPredictor::kB1 + j];
    for (int k = 0; k < kFeatureCount; ++k) a += pred.w1(j, k) * c.z[k];
    c.hidden[j] = std::tanh(a);
  }
  Mat3 m = pred.base;
  for (int o = 0; o < kMatrixElems; ++o) {
    double a = pred.params[CasPredictor::kB2 + o];
    for (int j = 0; j < kHiddenUnits; ++j) a += pred.w2(o, j) * c.hidden[j];
    c.out[o] = a;
    m.m[o] += 0.5 * std::tanh(a);
  }
  return m;
}

void predict_matrix_backward(const CasPredictor& pred, const PredictorCache& cache, const Mat3& grad_m,
                             std::span<double> grad) {
  std::array<double, kMatrixElems> d_out{};
  for (int o = 0; o < kMatrixElems; ++o) {
    const double t = std::tanh(cache.out[o]);
    d_out[o] = grad_m.m[o] * 0.5 * (1.0 - t * t);
  }
  std::array<double, kHiddenUnits> d_hidden{};
  for (int o = 0; o < kMatrixElems; ++o) {
    grad[CasPredictor::kB2 + o] += d_out[o];
    for (int j = 0; j < kHiddenUnits; ++j) {
      grad[CasPredictor::kW2 + o * kHiddenUnits + j] += d_out[o] * cache.hidden[j];
      d_hidden[j] += d_out[o] * pred.w2(o, j);
    }
  }
  for (int j = 0; j < kHiddenUnits; ++j) {
    const double d_pre = d_hidden[j] * (1.0 - cache.hidden[j] * cache.hidden[j]);
    grad[CasPredictor::kB1 + j] += d_pre;
    for (int k = 0; k < kFeatureCount; ++k) grad[CasPredictor::kW1 + j * kFeatureCount + k] += d_pre * cache.z[k];
  }
}

AlignLoss axis_alignment_loss(std::span<const Mat3> batch) {
  if (batch.empty()) throw Error(ErrorCode::InvalidArgument, "axis_alignment_loss: empty batch");
  AlignLoss res;
  res.grad.resize(batch.size());
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Mat3& m = batch[b];
    Mat3& g = res.grad[b];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double d = m(i, 0) * m(j, 0) + m(i, 1) * m(j, 1) + m(i, 2) * m(j, 2);
        res.value += inv_b * d * d;
        // Each ordered pair (i,j) touches both rows.
        for (int k = 0; k < 3; ++k) {
          g(i, k) += inv_b * 2.0 * d * m(j, k);
          g(j, k) += inv_b * 2.0 * d * m(i, k);
        }
      }
    }
  }
  return res;
}

}  // namespace fringekit
