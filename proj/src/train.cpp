#include "fringekit/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "fringekit/log.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/png_io.hpp"
#include "fringekit/rng.hpp"
#include "fringekit/synth.hpp"

namespace fringekit {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorCode::Config, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::Config, "batch_size must be >= 1");
  if (!(lr >= 0.0) || !(weight_decay >= 0.0)) throw Error(ErrorCode::Config, "lr and weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw Error(ErrorCode::Config, "invalid Adam hyperparameters");
  }
  if (crop < 0 || (crop > 0 && crop < 3)) throw Error(ErrorCode::Config, "crop must be 0 or >= 3");
  ecas.validate();
}

double cosine_lr(double lr0, long step, long total) {
  if (total <= 0) return lr0;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

AdamW::AdamW(std::size_t size, std::size_t decay_end, double beta1, double beta2, double eps, double weight_decay)
    : m_(size, 0.0), v_(size, 0.0), decay_end_(decay_end), beta1_(beta1), beta2_(beta2), eps_(eps), wd_(weight_decay) {}

void AdamW::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "AdamW: parameter/gradient size mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i < decay_end_) params[i] -= lr * wd_ * params[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

PairSet load_split(const fs::path& dataset_dir, const std::string& split) {
  const Manifest manifest = read_manifest(dataset_dir / kManifestName);
  const auto recs = manifest.split(split);
  PairSet set;
  set.names.resize(recs.size());
  set.inputs.resize(recs.size());
  set.targets.resize(recs.size());
  parallel_for(recs.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      set.names[i] = recs[i]->fringed;
      set.inputs[i] = read_png(dataset_dir / recs[i]->fringed);
      set.targets[i] = read_png(dataset_dir / recs[i]->clean);
      require_same_shape(set.inputs[i], set.targets[i], "load_split");
    }
  });
  return set;
}

std::string epoch_to_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["lr"] = e.lr;
  j["l1"] = e.loss.l1;
  j["perceptual_y"] = e.loss.perceptual_y;
  j["chroma"] = e.loss.chroma;
  j["smooth"] = e.loss.smooth;
  j["align"] = e.loss.align;
  j["total"] = e.loss.total;
  auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return *v;
  };
  j["val_psnr"] = opt(e.val_psnr);
  j["val_ecas"] = opt(e.val_ecas);
  j["guarded"] = e.guarded;
  if (!e.crop_seeds.empty()) j["crop_seeds"] = e.crop_seeds;
  return j.dump();
}

void fit_feature_norm(CasPredictor& pred, std::span<const ImageBuf> inputs) {
  if (inputs.empty()) return;
  std::vector<Features> feats(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) feats[i] = extract_global_features(inputs[i]);
  });
  const double n = static_cast<double>(inputs.size());
  for (int k = 0; k < kFeatureCount; ++k) {
    double s = 0.0, s2 = 0.0;
    for (const auto& f : feats) {
      s += f[k];
      s2 += f[k] * f[k];
    }
    const double mean = s / n;
    pred.center[k] = mean;
    pred.scale[k] = std::max(1e-3, std::sqrt(std::max(0.0, s2 / n - mean * mean)));
  }
}

std::vector<double> flatten_params(const Model& m) {
  std::vector<double> flat;
  flat.reserve(CasPredictor::kParamCount + kLut5DSize + kLut1DSize);
  flat.insert(flat.end(), m.predictor.params.begin(), m.predictor.params.end());
  flat.insert(flat.end(), m.lut5.entries.begin(), m.lut5.entries.end());
  flat.insert(flat.end(), m.lut1.entries.begin(), m.lut1.entries.end());
  return flat;
}

void unflatten_params(Model& m, std::span<const double> flat) {
  if (flat.size() != CasPredictor::kParamCount + kLut5DSize + kLut1DSize) {
    throw Error(ErrorCode::ShapeMismatch, "flat parameter vector has the wrong length");
  }
  auto it = flat.begin();
  std::copy_n(it, CasPredictor::kParamCount, m.predictor.params.begin());
  it += CasPredictor::kParamCount;
  std::copy_n(it, kLut5DSize, m.lut5.entries.begin());
  it += kLut5DSize;
  std::copy_n(it, kLut1DSize, m.lut1.entries.begin());
}

std::vector<double> flatten_grad(const ModelGrad& g) {
  std::vector<double> flat;
  flat.reserve(g.predictor.size() + g.lut5.size() + g.lut1.size());
  flat.insert(flat.end(), g.predictor.begin(), g.predictor.end());
  flat.insert(flat.end(), g.lut5.begin(), g.lut5.end());
  flat.insert(flat.end(), g.lut1.begin(), g.lut1.end());
  return flat;
}

std::pair<double, double> validate_model(const Model& model, const PairSet& set, const EcasConfig& cfg) {
  if (set.empty()) throw Error(ErrorCode::EmptyDataset, "validation set is empty");
  std::vector<double> p(set.size()), e(set.size());
  parallel_for(set.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const ImageBuf out = correct_image(model, set.inputs[i]);
      p[i] = psnr(out, set.targets[i]);
      e[i] = ecas(out, set.targets[i], cfg);
    }
  });
  double ps = 0.0, es = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    ps += p[i];
    es += e[i];
  }
  return {ps / static_cast<double>(set.size()), es / static_cast<double>(set.size())};
}

namespace {

ImageBuf crop_image(const ImageBuf& img, int x0, int y0, int side) {
  ImageBuf out(side, side, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) out.at(c, x, y) = img.at(c, x0 + x, y0 + y);
    }
  }
  return out;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void numerical_abort(int epoch, long step, const std::vector<std::size_t>& idx, const PairSet& set,
                                  const LossBreakdown& loss) {
  std::ostringstream os;
  os << "non-finite loss or gradient at epoch " << epoch << ", step " << step << " (l1=" << loss.l1
     << " perceptual_y=" << loss.perceptual_y << " chroma=" << loss.chroma << " smooth=" << loss.smooth
     << " align=" << loss.align << "); batch:";
  for (std::size_t i : idx) os << ' ' << set.names[i];
  log::error(os.str());
  throw Error(ErrorCode::NumericalFailure, os.str());
}

}  // namespace

TrainResult train(Model model, const PairSet& train_set, const PairSet& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  model.validate();
  if (train_set.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (cfg.fit_features) fit_feature_norm(model.predictor, train_set.inputs);

  const std::size_t n = train_set.size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  const long batches_per_epoch = static_cast<long>((n + bs - 1) / bs);
  const long total_steps = batches_per_epoch * cfg.epochs;

  std::vector<double> params = flatten_params(model);
  AdamW opt(params.size(), CasPredictor::kParamCount, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);

  TrainResult result;
  long step = 0;
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    EpochLog log_entry;
    log_entry.epoch = epoch + 1;
    log_entry.lr = cosine_lr(cfg.lr, step, total_steps);
    for (long b = 0; b < batches_per_epoch; ++b, ++step) {
      const std::size_t lo = static_cast<std::size_t>(b) * bs;
      const std::size_t hi = std::min(n, lo + bs);
      std::vector<std::size_t> idx(order.begin() + lo, order.begin() + hi);

      std::vector<ImageBuf> crops_in, crops_gt;
      std::vector<TrainSample> batch;
      if (cfg.crop > 0) {
        const std::uint64_t crop_seed = mix_seed(cfg.seed ^ 0x63726f70ULL, static_cast<std::uint64_t>(step));
        log_entry.crop_seeds.push_back(crop_seed);
        Rng rng(crop_seed);
        for (std::size_t i : idx) {
          const ImageBuf& in = train_set.inputs[i];
          const int side = std::min({cfg.crop, in.width(), in.height()});
          const int x0 = rng.uniform_int(0, in.width() - side);
          const int y0 = rng.uniform_int(0, in.height() - side);
          crops_in.push_back(crop_image(in, x0, y0, side));
          crops_gt.push_back(crop_image(train_set.targets[i], x0, y0, side));
        }
        for (std::size_t k = 0; k < idx.size(); ++k) batch.push_back({&crops_in[k], &crops_gt[k]});
      } else {
        for (std::size_t i : idx) batch.push_back({&train_set.inputs[i], &train_set.targets[i]});
      }

      const BatchLoss bl = compute_loss(model, batch, true);
      const std::vector<double> grad = flatten_grad(bl.grad);
      if (!std::isfinite(bl.loss.total) || !all_finite(grad)) numerical_abort(epoch + 1, step, idx, train_set, bl.loss);

      opt.step(params, grad, cosine_lr(cfg.lr, step, total_steps));
      unflatten_params(model, params);
      if (!all_finite(params)) numerical_abort(epoch + 1, step, idx, train_set, bl.loss);

      const double inv = 1.0 / static_cast<double>(batches_per_epoch);
      log_entry.loss.l1 += bl.loss.l1 * inv;
      log_entry.loss.perceptual_y += bl.loss.perceptual_y * inv;
      log_entry.loss.chroma += bl.loss.chroma * inv;
      log_entry.loss.smooth += bl.loss.smooth * inv;
      log_entry.loss.align += bl.loss.align * inv;
      log_entry.loss.total += bl.loss.total * inv;
      log_entry.guarded += bl.guarded;
    }
    if (!val_set.empty()) {
      const auto [p, e] = validate_model(model, val_set, cfg.ecas);
      log_entry.val_psnr = p;
      log_entry.val_ecas = e;
    }
    log::info(epoch_to_json(log_entry));
    if (on_epoch) on_epoch(log_entry);
    result.log.push_back(std::move(log_entry));
  }
  result.model = std::move(model);
  return result;
}

}  // namespace fringekit
