#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fringekit/metrics.hpp"
#include "fringekit/pipeline.hpp"

namespace fringekit {

struct TrainConfig {
  int epochs = 150;
  int batch_size = 16;
  double lr = 5e-5;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  int crop = 0;               // square crop side; 0 trains on whole images
  bool fit_features = true;   // set feature centre/scale from the training inputs
  EcasConfig ecas;

  void validate() const;
};

/// lr0 * 0.5 * (1 + cos(pi * step / total)).
double cosine_lr(double lr0, long step, long total);

/// Adam with decoupled weight decay over one flat parameter vector. Decay
/// applies only to indices below decay_end.
class AdamW {
 public:
  AdamW(std::size_t size, std::size_t decay_end, double beta1, double beta2, double eps, double weight_decay);

  void step(std::span<double> params, std::span<const double> grad, double lr);
  long steps() const { return t_; }

 private:
  std::vector<double> m_, v_;
  std::size_t decay_end_;
  double beta1_, beta2_, eps_, wd_;
  long t_ = 0;
};

struct PairSet {
  std::vector<std::string> names;
  std::vector<ImageBuf> inputs;   // fringed
  std::vector<ImageBuf> targets;  // clean

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }
};

/// Loads one split of a synthesized dataset, in manifest order.
PairSet load_split(const std::filesystem::path& dataset_dir, const std::string& split);

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;  // rate used by the epoch's first step
  LossBreakdown loss;  // mean over the epoch's batches
  std::optional<double> val_psnr;
  std::optional<double> val_ecas;
  int guarded = 0;
  std::vector<std::uint64_t> crop_seeds;
};

std::string epoch_to_json(const EpochLog& e);

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

/// Fits feature normalisation to the given inputs (mean and std, with the
/// std floored at 1e-3).
void fit_feature_norm(CasPredictor& pred, std::span<const ImageBuf> inputs);

/// Flat parameter view used by the optimizer: [MLP | Lut5D | Lut1D].
std::vector<double> flatten_params(const Model& m);
void unflatten_params(Model& m, std::span<const double> flat);
std::vector<double> flatten_grad(const ModelGrad& g);

TrainResult train(Model model, const PairSet& train_set, const PairSet& val_set, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Mean PSNR and ECAS of correct_image over a pair set.
std::pair<double, double> validate_model(const Model& model, const PairSet& set, const EcasConfig& cfg);

}  // namespace fringekit
