// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// non-zero if any measurable criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ciede_vectors.hpp"
#include "fringekit/metrics.hpp"
#include "fringekit/model_io.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/pipeline.hpp"
#include "fringekit/scenes.hpp"
#include "fringekit/synth.hpp"
#include "fringekit/train.hpp"

using namespace fringekit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::printf("%s criterion %d: %s | %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_err(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

ImageBuf random_image(int w, int h, Rng& rng, double lo, double hi) {
  ImageBuf img(w, h, 3);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  // The headline table needs a pretrained encoder, a VGG perceptual loss and
  // the full video training set. None of these exist in this toolkit, so the
  // numbers are reported as out of reach rather than approximated.
  std::printf(
      "FAIL criterion 1: published full-scale PSNR 39.052 / SSIM 0.9849 / ECAS 0.0438 | NOT REPRODUCIBLE at desk scale "
      "(no pretrained encoder, no VGG loss, no full training set); criteria 2-10 substitute\n");
  std::fflush(stdout);
}

void criterion_2() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const int n = 16;
  // Residuals with a fixed sign in every RGB and YCbCr component keep the
  // absolute-value terms smooth within the finite-difference step.
  ImageBuf in = random_image(n, n, rng, 0.6, 0.8);
  ImageBuf gt(n, n, 3);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      gt.at(0, x, y) = 0.5f * in.at(0, x, y);
      gt.at(1, x, y) = 0.5f * in.at(1, x, y) + 0.45f;
      gt.at(2, x, y) = 0.5f * in.at(2, x, y);
    }
  }
  Model m = Model::identity(11);
  fit_feature_norm(m.predictor, std::span<const ImageBuf>(&in, 1));
  for (std::size_t i = CasPredictor::kW2; i < CasPredictor::kParamCount; ++i) m.predictor.params[i] = 0.1 * rng.normal();
  for (double& v : m.lut1.entries) v = 0.95 * v + 0.025;
  // Small affine tilt of the 5D table.
  std::array<double, 5> lin{};
  for (double& v : lin) v = rng.uniform(-0.005, 0.005);
  for (int i0 = 0; i0 < 9; ++i0)
    for (int i1 = 0; i1 < 9; ++i1)
      for (int i2 = 0; i2 < 9; ++i2)
        for (int i3 = 0; i3 < 9; ++i3)
          for (int i4 = 0; i4 < 9; ++i4) {
            const int idx[5] = {i0, i1, i2, i3, i4};
            double d = 0;
            for (int k = 0; k < 5; ++k) d += lin[k] * idx[k] / 8.0;
            m.lut5.entries[Lut5D::index(i0, i1, i2, i3, i4)] += d;
          }

  const TrainSample s{&in, &gt};
  const BatchLoss b = compute_loss(m, std::span(&s, 1), true);
  auto total = [&](const Model& q) { return compute_loss(q, std::span(&s, 1), false).loss.total; };
  const double eps = 1e-3;

  double worst_mlp = 0, worst_5d = 0, worst_1d = 0;
  for (std::size_t i = 0; i < CasPredictor::kParamCount; ++i) {
    Model a = m, c = m;
    a.predictor.params[i] += eps;
    c.predictor.params[i] -= eps;
    worst_mlp = std::max(worst_mlp, rel_err(b.grad.predictor[i], (total(a) - total(c)) / (2 * eps)));
  }
  // 25 entries the image reaches plus 25 drawn uniformly.
  std::vector<std::size_t> touched, chosen;
  const SmoothnessLoss sm = smoothness_loss(m.lut1, m.lut5);
  for (std::size_t i = 0; i < kLut5DSize; ++i) {
    if (std::abs(b.grad.lut5[i] - m.weights.smooth * sm.grad_5d[i]) > 1e-12) touched.push_back(i);
  }
  for (int k = 0; k < 25 && !touched.empty(); ++k) chosen.push_back(touched[rng.below(touched.size())]);
  while (chosen.size() < 50) chosen.push_back(rng.below(kLut5DSize));
  for (std::size_t i : chosen) {
    Model a = m, c = m;
    a.lut5.entries[i] += eps;
    c.lut5.entries[i] -= eps;
    worst_5d = std::max(worst_5d, rel_err(b.grad.lut5[i], (total(a) - total(c)) / (2 * eps)));
  }
  for (int k = 0; k < 20; ++k) {
    const std::size_t i = rng.below(kLut1DSize);
    Model a = m, c = m;
    a.lut1.entries[i] += eps;
    c.lut1.entries[i] -= eps;
    worst_1d = std::max(worst_1d, rel_err(b.grad.lut1[i], (total(a) - total(c)) / (2 * eps)));
  }
  const double secs = seconds_since(t0);
  const double worst = std::max({worst_mlp, worst_5d, worst_1d});
  std::ostringstream d;
  d << "max rel err MLP " << worst_mlp << " (713 params), 5D " << worst_5d << " (50 entries, " << touched.size()
    << " touched by the image), 1D " << worst_1d << " (20 entries); " << fmt("%.1f s", secs);
  report(2, worst < 1e-4 && secs < 60.0, "end-to-end gradient vs central differences (eps 1e-3, tol 1e-4, < 60 s)",
         d.str());
}

void criterion_3() {
  Rng rng(3);
  const Model m = Model::identity(3);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const int w = 17 + static_cast<int>(rng.below(40)), h = 13 + static_cast<int>(rng.below(40));
    const ImageBuf img = random_image(w, h, rng, 0.0, 1.0);
    const ImageBuf out = correct_image(m, img);
    for (std::size_t k = 0; k < img.data().size(); ++k)
      worst = std::max(worst, static_cast<double>(std::abs(out.data()[k] - img.data()[k])));
  }
  report(3, worst < 1e-4, "identity model maps 20 random images to themselves (max abs < 1e-4)",
         fmt("max abs error %.3g", worst));
}

void criterion_4() {
  Rng rng(4);
  Lut5D lut5 = Lut5D::identity();
  for (double& v : lut5.entries) v = rng.uniform01();
  Lut1D lut1 = Lut1D::identity();
  for (double& v : lut1.entries) v = rng.uniform01();
  std::size_t bad5 = 0, bad1 = 0;
  for (int i0 = 0; i0 < 9; ++i0)
    for (int i1 = 0; i1 < 9; ++i1)
      for (int i2 = 0; i2 < 9; ++i2)
        for (int i3 = 0; i3 < 9; ++i3)
          for (int i4 = 0; i4 < 9; ++i4) {
            const Coord5 c{i0 / 8.0, i1 / 8.0, i2 / 8.0, i3 / 8.0, i4 / 8.0};
            if (lookup_5d(lut5, c) != lut5.entries[Lut5D::index(i0, i1, i2, i3, i4)]) ++bad5;
          }
  for (int k = 0; k < kLut1DSize; ++k)
    if (lookup_1d(lut1, k / 1023.0) != lut1.entries[k]) ++bad1;
  double worst_sum = 0;
  for (int t = 0; t < 10000; ++t) {
    Coord5 c;
    for (double& v : c) v = rng.uniform01();
    double s = 0;
    for (double w : corner_weights(locate_5d(c))) s += w;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
  }
  std::ostringstream d;
  d << bad5 << "/59049 5D nodes and " << bad1 << "/1024 1D nodes differ; max |sum w - 1| = " << worst_sum;
  report(4, bad5 == 0 && bad1 == 0 && worst_sum < 1e-9, "lookups exact at grid nodes, corner weights sum to 1",
         d.str());
}

void criterion_5() {
  Rng rng(5);
  // Orthogonal matrices: base transform, identity, and random rotations.
  std::vector<Mat3> orth{Mat3::identity(), base_matrix()};
  for (int t = 0; t < 5; ++t) {
    const double a = rng.uniform(0, 6.283), b = rng.uniform(0, 6.283);
    const Mat3 rz{{std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1}};
    const Mat3 rx{{1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b)}};
    orth.push_back(rz * rx);
  }
  double worst_orth = 0;
  for (const Mat3& m : orth) worst_orth = std::max(worst_orth, axis_alignment_loss(std::span(&m, 1)).value);
  const Mat3 dup{{1, 0, 0, 1, 0, 0, 0, 0, 1}};
  const double dup_val = axis_alignment_loss(std::span(&dup, 1)).value;

  Lut5D flat = Lut5D::identity();
  std::fill(flat.entries.begin(), flat.entries.end(), 0.37);
  Lut1D affine = Lut1D::identity(-1.5, 1.5);
  for (int k = 0; k < kLut1DSize; ++k) affine.entries[k] = 0.1 + 0.75 * k / 1023.0;
  const double smooth = smoothness_loss(affine, flat).value;

  std::ostringstream d;
  d << "align(orthogonal) max " << worst_orth << ", align(duplicate rows) " << dup_val
    << ", smooth(constant 5D, affine 1D) " << smooth;
  report(5, worst_orth < 1e-24 && dup_val == 2.0 && smooth < 1e-24,
         "alignment 0 on orthogonal, 2 on duplicate unit rows; smoothness 0 on constant/affine tables", d.str());
}

struct TrainRun {
  std::vector<std::uint8_t> model_bytes;
  std::vector<std::string> log;
  double psnr_fringed = 0, psnr_corrected = 0;
  double ecas_fringed = 0, ecas_corrected = 0;
  std::size_t n_train = 0, n_val = 0;
  double seconds = 0;
  Model model;
};

TrainRun desk_training(const fs::path& dir) {
  const auto t0 = Clock::now();
  fs::remove_all(dir);
  const std::uint64_t seed = 7;
  write_scenes(dir / "scenes", 40, 128, 128, seed);
  SynthParams sp;
  sp.seed = seed;
  build_dataset(dir / "scenes", dir / "data", sp, SplitFractions{0.8, 0.2, 0.0});
  const PairSet train_set = load_split(dir / "data", "train");
  const PairSet val_set = load_split(dir / "data", "val");

  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.batch_size = 8;
  cfg.lr = 5e-3;
  cfg.seed = seed;
  TrainRun run;
  const TrainResult r = train(Model::identity(seed), train_set, val_set, cfg);
  save_model(dir / "model.bin", r.model);
  std::ifstream f(dir / "model.bin", std::ios::binary);
  run.model_bytes.assign(std::istreambuf_iterator<char>(f), {});
  for (const auto& e : r.log) run.log.push_back(epoch_to_json(e));
  run.model = r.model;
  run.n_train = train_set.size();
  run.n_val = val_set.size();

  const EcasConfig ec;
  for (std::size_t i = 0; i < val_set.size(); ++i) {
    run.psnr_fringed += psnr(val_set.inputs[i], val_set.targets[i]) / val_set.size();
    run.ecas_fringed += ecas(val_set.inputs[i], val_set.targets[i], ec) / val_set.size();
  }
  std::tie(run.psnr_corrected, run.ecas_corrected) = validate_model(r.model, val_set, ec);
  run.seconds = seconds_since(t0);
  return run;
}

TrainRun criterion_6(const fs::path& work) {
  set_thread_count(1);
  TrainRun run = desk_training(work / "run_a");
  const bool psnr_ok = run.psnr_corrected >= run.psnr_fringed + 2.0;
  const bool ecas_ok = run.ecas_corrected <= 0.5 * run.ecas_fringed;
  std::ostringstream d;
  d << run.n_train << " train / " << run.n_val << " val; PSNR fringed " << fmt("%.3f", run.psnr_fringed)
    << " -> corrected " << fmt("%.3f", run.psnr_corrected) << " dB (gain " << fmt("%+.3f", run.psnr_corrected - run.psnr_fringed)
    << "); ECAS " << fmt("%.4f", run.ecas_fringed) << " -> " << fmt("%.4g", run.ecas_corrected) << "; "
    << fmt("%.1f s single-threaded", run.seconds);
  report(6, psnr_ok && ecas_ok, "desk-scale training: +2 dB PSNR and >= 50% ECAS reduction on validation", d.str());
  return run;
}

void criterion_7(const fs::path& work, const TrainRun& first) {
  set_thread_count(1);
  const TrainRun again = desk_training(work / "run_b");
  const bool same_model = again.model_bytes == first.model_bytes;
  const bool same_log = again.log == first.log;
  std::ostringstream d;
  d << "model " << first.model_bytes.size() << " bytes " << (same_model ? "identical" : "DIFFERENT") << ", "
    << first.log.size() << " epoch records " << (same_log ? "identical" : "DIFFERENT");
  report(7, same_model && same_log, "repeated training run is byte-identical", d.str());
}

void criterion_8() {
  double worst = 0;
  int bad = 0;
  for (const auto& v : fktest::kCiedeVectors) {
    const double e = std::abs(ciede2000(v.a, v.b) - v.expected);
    worst = std::max(worst, e);
    if (e > 1e-4) ++bad;
  }
  report(8, bad == 0, "CIEDE2000 matches the 34 published conformance pairs within 1e-4",
         fmt("max abs deviation %.3g", worst) + ", " + std::to_string(bad) + " pairs out of tolerance");
}

double median_time(const Model& m, const ImageBuf& img, int iters) {
  std::vector<double> t;
  for (int i = 0; i < iters; ++i) {
    const auto t0 = Clock::now();
    const ImageBuf out = correct_image(m, img);
    t.push_back(seconds_since(t0));
    if (out.width() != img.width()) std::abort();
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

void criterion_9(const Model& model) {
  set_thread_count(1);
  const ImageBuf img2k = make_scene(2048, 1080, 91);
  const ImageBuf img4k = make_scene(3840, 2160, 92);
  correct_image(model, img2k);  // warm-up
  const double t2k = median_time(model, img2k, 3);
  const double t4k = median_time(model, img4k, 3);
  const double pixel_ratio = (3840.0 * 2160.0) / (2048.0 * 1080.0);
  const double time_ratio = t4k / t2k;
  std::ostringstream d;
  d << fmt("2K %.3f s", t2k) << fmt(", 4K %.3f s", t4k) << fmt(", time ratio %.3f", time_ratio)
    << fmt(" vs pixel ratio %.3f", pixel_ratio) << fmt(" (limit %.3f)", 1.3 * pixel_ratio);
  report(9, t2k < 2.0 && t4k < 8.0 && time_ratio <= 1.3 * pixel_ratio,
         "single-threaded inference: 2K < 2 s, 4K < 8 s, linear scaling", d.str());
}

void criterion_10() {
  ImageBuf flat(64, 48, 3, 0.42f);
  Rng rng(10);
  const SynthResult r = synthesize_fringe(flat, SynthParams{}, rng);
  const bool unchanged = r.fringed == flat && r.record.edge_pixels == 0;

  Rng img_rng(11);
  const ImageBuf clean = random_image(32, 24, img_rng, 0.0, 1.0);
  const GrayBuf mask(32, 24, 1.0f);
  std::size_t mismatches = 0;
  for (double alpha : {0.3, 0.55, 0.8}) {
    const ImageBuf out = blend_fringe(clean, mask, alpha, {0.6, 0.0, 0.8});
    const double purple[3] = {0.6, 0.0, 0.8};
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
          const double want = std::clamp(purple[c] * alpha + (1.0 - alpha) * clean.at(c, x, y), 0.0, 1.0);
          if (out.at(c, x, y) != static_cast<float>(want)) ++mismatches;
        }
  }
  std::ostringstream d;
  d << "edge-free input " << (unchanged ? "unchanged" : "MODIFIED") << "; " << mismatches
    << " of 6912 blended samples differ from the closed form";
  report(10, unchanged && mismatches == 0, "synthesis: no-edge branch is a no-op, blend is pixel-exact at mask 1",
         d.str());
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "fringekit_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--workdir") work = argv[i + 1];
  fs::create_directories(work);

  try {
    set_thread_count(1);
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    const TrainRun run = criterion_6(work);
    criterion_7(work, run);
    criterion_8();
    criterion_9(run.model);
    criterion_10();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d measurable criteria failed (criterion 1 is out of scope by construction)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
