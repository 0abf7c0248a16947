#include "fringekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fringekit/color.hpp"
#include "fringekit/filter.hpp"
#include "fringekit/log.hpp"
#include "fringekit/parallel.hpp"

namespace fringekit {

namespace {

constexpr double kGuardShift = 1e-3;
constexpr double kBoxWeight = 0.1;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// Y, Cb, Cr as linear functions of RGB (the Cb/Cr offsets cancel in every
// difference taken here).
struct YccCoeffs {
  double m[3][3];
};

YccCoeffs ycc_coeffs() {
  YccCoeffs k{};
  const YCbCr zero = rgb_to_ycbcr(0.0, 0.0, 0.0);
  for (int c = 0; c < 3; ++c) {
    double rgb[3] = {0.0, 0.0, 0.0};
    rgb[c] = 1.0;
    const YCbCr v = rgb_to_ycbcr(rgb[0], rgb[1], rgb[2]);
    k.m[0][c] = v.y - zero.y;
    k.m[1][c] = v.cb - zero.cb;
    k.m[2][c] = v.cr - zero.cr;
  }
  return k;
}

// Everything the backward pass needs from one image.
struct Tape {
  int w = 0;
  int h = 0;
  std::array<std::vector<double>, 3> x;
  PredictorCache cache;
  Mat3 m;
  Mat3 minv;
  bool guarded = false;
  std::vector<double> lum, fringe, ortho;
  std::vector<double> lum2, fringe2;
  RgbPlanesD out;

  std::size_t idx(int px, int py) const {
    return static_cast<std::size_t>(std::clamp(py, 0, h - 1)) * static_cast<std::size_t>(w) +
           static_cast<std::size_t>(std::clamp(px, 0, w - 1));
  }
};

// Unclamped coordinates; lookups clamp them and zero the gradient outside.
Coord5 raw_coords(const Tape& t, const CoordNorm& norm, int x, int y) {
  const auto& l = t.lum;
  const auto& f = t.fringe;
  return {
      norm.lum_to_unit(l[t.idx(x, y)]),
      norm.lum_to_unit(l[t.idx(x - 1, y)]),
      norm.lum_to_unit(l[t.idx(x, y - 1)]),
      norm.grad_to_unit(0.5 * (f[t.idx(x + 1, y)] - f[t.idx(x - 1, y)])),
      norm.grad_to_unit(0.5 * (f[t.idx(x, y + 1)] - f[t.idx(x, y - 1)])),
  };
}

Tape run_forward(const Model& model, const ImageBuf& img) {
  require_channels(img, 3, "forward");
  Tape t;
  t.w = img.width();
  t.h = img.height();
  const std::size_t n = img.pixel_count();
  for (int c = 0; c < 3; ++c) t.x[c].assign(img.plane(c).begin(), img.plane(c).end());

  t.m = predict_matrix(model.predictor, extract_global_features(img), &t.cache);
  if (!(std::abs(t.m.det()) >= kSingularDet)) {
    log::warn("singular CAS matrix during training (det " + std::to_string(t.m.det()) + "), adding 1e-3*I");
    for (int i = 0; i < 3; ++i) t.m(i, i) += kGuardShift;
    t.guarded = true;
  }
  t.minv = inverse(t.m);

  t.lum.resize(n);
  t.fringe.resize(n);
  t.ortho.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = t.m.apply(t.x[0][i], t.x[1][i], t.x[2][i]);
    t.lum[i] = v[0];
    t.fringe[i] = v[1];
    t.ortho[i] = v[2];
  }

  const CoordNorm& norm = model.norm;
  t.lum2.resize(n);
  t.fringe2.resize(n);
  for (auto& p : t.out) p = PlaneD(t.w, t.h);
  parallel_for(static_cast<std::size_t>(t.h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < t.w; ++x) {
        const std::size_t i = t.idx(x, y);
        t.lum2[i] = norm.lum_lo + (norm.lum_hi - norm.lum_lo) * lookup_5d(model.lut5, raw_coords(t, norm, x, y));
        t.fringe2[i] = lookup_1d(model.lut1, t.fringe[i]);
        const auto v = t.minv.apply(t.lum2[i], t.fringe2[i], t.ortho[i]);
        for (int c = 0; c < 3; ++c) t.out[c].data()[i] = v[c];
      }
    }
  });
  return t;
}

// Accumulates parameter gradients into g given dL/dout and an extra dL/dM
// term (the alignment loss).
void run_backward(const Model& model, const Tape& t, const RgbPlanesD& gout, const Mat3& extra_dm, ModelGrad& g) {
  const std::size_t n = static_cast<std::size_t>(t.w) * static_cast<std::size_t>(t.h);
  const CoordNorm& norm = model.norm;
  const double lum_span = norm.lum_hi - norm.lum_lo;
  std::vector<double> dlum(n, 0.0), dfringe(n, 0.0), dortho(n, 0.0);
  Mat3 dminv;
  const Mat3 minv_t = t.minv.transposed();

  for (int y = 0; y < t.h; ++y) {
    for (int x = 0; x < t.w; ++x) {
      const std::size_t i = t.idx(x, y);
      const double go[3] = {gout[0].data()[i], gout[1].data()[i], gout[2].data()[i]};
      const double v[3] = {t.lum2[i], t.fringe2[i], t.ortho[i]};
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) dminv(r, c) += go[r] * v[c];
      }
      const auto gv = minv_t.apply(go[0], go[1], go[2]);

      const auto b5 = lookup_5d_backward(model.lut5, raw_coords(t, norm, x, y), gv[0] * lum_span);
      for (int k = 0; k < kLut5DCorners; ++k) g.lut5[b5.entry[k]] += b5.grad[k];
      const auto& dc = b5.coord_grad;
      dlum[i] += dc[0] / lum_span;
      dlum[t.idx(x - 1, y)] += dc[1] / lum_span;
      dlum[t.idx(x, y - 1)] += dc[2] / lum_span;
      const double dgx = 0.5 * dc[3] / (2.0 * norm.g_max);
      dfringe[t.idx(x + 1, y)] += dgx;
      dfringe[t.idx(x - 1, y)] -= dgx;
      const double dgy = 0.5 * dc[4] / (2.0 * norm.g_max);
      dfringe[t.idx(x, y + 1)] += dgy;
      dfringe[t.idx(x, y - 1)] -= dgy;

      const auto b1 = lookup_1d_backward(model.lut1, t.fringe[i], gv[1]);
      g.lut1[b1.lower] += b1.grad_lower;
      g.lut1[b1.lower + 1] += b1.grad_upper;
      dfringe[i] += b1.input_grad;

      dortho[i] += gv[2];
    }
  }

  Mat3 dm;
  for (std::size_t i = 0; i < n; ++i) {
    const double d[3] = {dlum[i], dfringe[i], dortho[i]};
    for (int r = 0; r < 3; ++r) {
      dm(r, 0) += d[r] * t.x[0][i];
      dm(r, 1) += d[r] * t.x[1][i];
      dm(r, 2) += d[r] * t.x[2][i];
    }
  }
  // Minv = M^-1  =>  dL/dM = -Minv^T (dL/dMinv) Minv^T
  const Mat3 via_inv = minv_t * dminv * minv_t;
  for (int k = 0; k < 9; ++k) dm.m[k] += extra_dm.m[k] - via_inv.m[k];
  predict_matrix_backward(model.predictor, t.cache, dm, g.predictor);
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {l1, perceptual, chroma, smooth, align}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "loss weights must be finite and >= 0");
  }
}

Model Model::identity(std::uint64_t seed) {
  Model m;
  m.predictor = CasPredictor::initialized(seed);
  m.lut5 = Lut5D::identity();
  m.lut1 = Lut1D::identity(-kFringeDomain, kFringeDomain);
  return m;
}

void Model::validate() const {
  if (predictor.params.size() != CasPredictor::kParamCount) {
    throw Error(ErrorCode::Format, "predictor parameter count mismatch");
  }
  if (lut5.entries.size() != kLut5DSize || lut1.entries.size() != static_cast<std::size_t>(kLut1DSize)) {
    throw Error(ErrorCode::Format, "lookup table size mismatch");
  }
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(predictor.params) || !finite(lut5.entries) || !finite(lut1.entries)) {
    throw Error(ErrorCode::NumericalFailure, "model holds non-finite values");
  }
  norm.validate();
  weights.validate();
}

ImageBuf correct_image(const Model& model, const ImageBuf& img) {
  require_channels(img, 3, "correct_image");
  const int w = img.width(), h = img.height();
  const Mat3 m = predict_matrix(model.predictor, extract_global_features(img));
  const Mat3 minv = inverse(m);
  const CoordNorm& norm = model.norm;
  norm.validate();

  GrayBuf lum(w, h), fringe(w, h);
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  parallel_for(img.pixel_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto v = m.apply(r[i], g[i], b[i]);
      lum.data()[i] = static_cast<float>(v[0]);
      fringe.data()[i] = static_cast<float>(v[1]);
    }
  });

  ImageBuf out(w, h, 3);
  const auto o = m.row(2);
  const double lum_span = norm.lum_hi - norm.lum_lo;
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
    for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const Coord5 c{
            norm.lum_to_unit(lum.at(x, y)),
            norm.lum_to_unit(lum.clamped(x - 1, y)),
            norm.lum_to_unit(lum.clamped(x, y - 1)),
            norm.grad_to_unit(0.5 * (static_cast<double>(fringe.clamped(x + 1, y)) - fringe.clamped(x - 1, y))),
            norm.grad_to_unit(0.5 * (static_cast<double>(fringe.clamped(x, y + 1)) - fringe.clamped(x, y - 1))),
        };
        const double l2 = norm.lum_lo + lum_span * lookup_5d(model.lut5, c);
        const double f2 = lookup_1d(model.lut1, fringe.at(x, y));
        const double ortho = o[0] * r[i] + o[1] * g[i] + o[2] * b[i];
        const auto v = minv.apply(l2, f2, ortho);
        for (int ch = 0; ch < 3; ++ch) out.plane(ch)[i] = static_cast<float>(std::clamp(v[ch], 0.0, 1.0));
      }
    }
  });
  return out;
}

RgbPlanesD to_planes_d(const ImageBuf& img) {
  require_channels(img, 3, "to_planes_d");
  RgbPlanesD p;
  for (int c = 0; c < 3; ++c) {
    p[c] = PlaneD(img.width(), img.height(), std::vector<double>(img.plane(c).begin(), img.plane(c).end()));
  }
  return p;
}

RgbPlanesD forward_unclamped(const Model& model, const ImageBuf& img) { return run_forward(model, img).out; }

void combine_total(LossBreakdown& loss, const LossWeights& w) {
  loss.total = w.l1 * loss.l1 + w.perceptual * (loss.perceptual_y + w.chroma * loss.chroma) + w.smooth * loss.smooth +
               w.align * loss.align;
}

StructuralLoss structural_perceptual_y(const PlaneD& y_out, const PlaneD& y_gt) {
  if (!y_out.same_shape(y_gt)) throw Error(ErrorCode::ShapeMismatch, "structural loss: plane sizes differ");
  const int w = y_out.width(), h = y_out.height();
  StructuralLoss res;
  res.grad = PlaneD(w, h);
  if (y_out.empty()) return res;
  const double n = static_cast<double>(y_out.size());

  const auto so = sobel_gradients(y_out);
  const auto sg = sobel_gradients(y_gt);
  PlaneD dgx(w, h), dgy(w, h);
  for (std::size_t i = 0; i < y_out.size(); ++i) {
    const double mo = so.mag.data()[i];
    const double diff = mo - sg.mag.data()[i];
    res.value += std::abs(diff) / n;
    // The magnitude has no gradient at zero; take 0 there.
    if (mo > 0.0) {
      const double dm = sgn(diff) / n;
      dgx.data()[i] = dm * so.gx.data()[i] / mo;
      dgy.data()[i] = dm * so.gy.data()[i] / mo;
    }
  }
  const Kernel kx = sobel_kernel_x();
  const Kernel ky = sobel_kernel_y();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = dgx.at(x, y), gy = dgy.at(x, y);
      if (gx == 0.0 && gy == 0.0) continue;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
          const int sx = std::clamp(x + c - 1, 0, w - 1);
          const int sy = std::clamp(y + r - 1, 0, h - 1);
          res.grad.at(sx, sy) += kx.at(r, c) * gx + ky.at(r, c) * gy;
        }
      }
    }
  }

  const int wd = w / 2, hd = h / 2;
  if (wd > 0 && hd > 0) {
    const double nd = static_cast<double>(wd) * hd;
    for (int y = 0; y < hd; ++y) {
      for (int x = 0; x < wd; ++x) {
        double bo = 0.0, bg = 0.0;
        for (int k = 0; k < 4; ++k) {
          bo += y_out.at(2 * x + (k & 1), 2 * y + (k >> 1));
          bg += y_gt.at(2 * x + (k & 1), 2 * y + (k >> 1));
        }
        const double diff = 0.25 * (bo - bg);
        res.value += kBoxWeight * std::abs(diff) / nd;
        const double d = kBoxWeight * sgn(diff) / nd * 0.25;
        for (int k = 0; k < 4; ++k) res.grad.at(2 * x + (k & 1), 2 * y + (k >> 1)) += d;
      }
    }
  }
  return res;
}

StructuralLoss structural_perceptual_y(const GrayBuf& y_out, const GrayBuf& y_gt) {
  return structural_perceptual_y(plane_cast<double>(y_out), plane_cast<double>(y_gt));
}

ReconstructionLoss reconstruction_loss(const RgbPlanesD& out, const RgbPlanesD& gt, const LossWeights& w) {
  for (int c = 0; c < 3; ++c) {
    if (!out[c].same_shape(out[0]) || !gt[c].same_shape(out[0])) {
      throw Error(ErrorCode::ShapeMismatch, "reconstruction loss: image sizes differ");
    }
  }
  const int width = out[0].width(), height = out[0].height();
  const std::size_t n = out[0].size();
  ReconstructionLoss res;
  for (auto& g : res.grad) g = PlaneD(width, height);
  if (n == 0) return res;
  const double inv_n = 1.0 / static_cast<double>(n);
  const YccCoeffs k = ycc_coeffs();

  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = out[c].data()[i] - gt[c].data()[i];
      res.l1 += std::abs(d);
      res.grad[c].data()[i] += w.l1 * sgn(d) * inv_n / 3.0;
    }
  }
  res.l1 *= inv_n / 3.0;

  PlaneD y_out(width, height), y_gt(width, height);
  std::vector<double> dcb(n), dcr(n);
  const double chroma_scale = w.perceptual * w.chroma * inv_n;
  for (std::size_t i = 0; i < n; ++i) {
    double yo = 0, yg = 0, cbd = 0, crd = 0;
    for (int c = 0; c < 3; ++c) {
      const double vo = out[c].data()[i], vg = gt[c].data()[i];
      yo += k.m[0][c] * vo;
      yg += k.m[0][c] * vg;
      cbd += k.m[1][c] * (vo - vg);
      crd += k.m[2][c] * (vo - vg);
    }
    y_out.data()[i] = yo;
    y_gt.data()[i] = yg;
    res.chroma += (std::abs(cbd) + std::abs(crd)) * inv_n;
    dcb[i] = chroma_scale * sgn(cbd);
    dcr[i] = chroma_scale * sgn(crd);
  }

  const StructuralLoss s = structural_perceptual_y(y_out, y_gt);
  res.perceptual_y = s.value;
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = w.perceptual * s.grad.data()[i];
    for (int c = 0; c < 3; ++c) res.grad[c].data()[i] += dy * k.m[0][c] + dcb[i] * k.m[1][c] + dcr[i] * k.m[2][c];
  }
  return res;
}

ModelGrad ModelGrad::zeros() {
  ModelGrad g;
  g.predictor.assign(CasPredictor::kParamCount, 0.0);
  g.lut5.assign(kLut5DSize, 0.0);
  g.lut1.assign(kLut1DSize, 0.0);
  return g;
}

void ModelGrad::add(const ModelGrad& o) {
  for (std::size_t i = 0; i < predictor.size(); ++i) predictor[i] += o.predictor[i];
  for (std::size_t i = 0; i < lut5.size(); ++i) lut5[i] += o.lut5[i];
  for (std::size_t i = 0; i < lut1.size(); ++i) lut1[i] += o.lut1[i];
}

BatchLoss compute_loss(const Model& model, std::span<const TrainSample> batch, bool want_grad) {
  if (batch.empty()) throw Error(ErrorCode::EmptyDataset, "compute_loss: empty batch");
  model.weights.validate();
  for (const auto& s : batch) {
    if (!s.input || !s.target) throw Error(ErrorCode::InvalidArgument, "compute_loss: null sample");
    require_same_shape(*s.input, *s.target, "compute_loss");
  }
  const std::size_t nb = batch.size();
  const double inv_b = 1.0 / static_cast<double>(nb);
  const LossWeights& w = model.weights;

  // Per-sample work runs in parallel; every reduction below walks samples in
  // index order so results do not depend on the thread count.
  std::vector<Tape> tapes(nb);
  std::vector<ReconstructionLoss> recon(nb);
  parallel_for(nb, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      tapes[b] = run_forward(model, *batch[b].input);
      recon[b] = reconstruction_loss(tapes[b].out, to_planes_d(*batch[b].target), w);
    }
  });

  BatchLoss res;
  for (std::size_t b = 0; b < nb; ++b) {
    res.loss.l1 += recon[b].l1 * inv_b;
    res.loss.perceptual_y += recon[b].perceptual_y * inv_b;
    res.loss.chroma += recon[b].chroma * inv_b;
    res.matrices.push_back(tapes[b].m);
    res.guarded += tapes[b].guarded ? 1 : 0;
  }
  const AlignLoss align = axis_alignment_loss(res.matrices);
  const SmoothnessLoss smooth = smoothness_loss(model.lut1, model.lut5);
  res.loss.align = align.value;
  res.loss.smooth = smooth.value;
  combine_total(res.loss, w);
  if (!want_grad) return res;

  std::vector<ModelGrad> grads(nb);
  parallel_for(nb, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      RgbPlanesD gout = std::move(recon[b].grad);
      for (auto& p : gout) {
        for (double& v : p.data()) v *= inv_b;
      }
      Mat3 extra = align.grad[b];
      for (double& v : extra.m) v *= w.align;
      grads[b] = ModelGrad::zeros();
      run_backward(model, tapes[b], gout, extra, grads[b]);
    }
  });
  res.grad = ModelGrad::zeros();
  for (const auto& g : grads) res.grad.add(g);
  for (std::size_t i = 0; i < kLut5DSize; ++i) res.grad.lut5[i] += w.smooth * smooth.grad_5d[i];
  for (int i = 0; i < kLut1DSize; ++i) res.grad.lut1[i] += w.smooth * smooth.grad_1d[i];
  return res;
}

}  // namespace fringekit
