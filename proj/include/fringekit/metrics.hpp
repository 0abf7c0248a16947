#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "fringekit/color.hpp"
#include "fringekit/image.hpp"

namespace fringekit {

struct EcasConfig {
  double tau_edge = 0.15;  // fraction of the maximum Sobel magnitude of gray(gt)
  double tau_sat = 0.25;
  HueBand purple = kPurpleBand;
  HueBand green = kGreenBand;

  void validate() const;
};

struct MetricsReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double delta_e = 0.0;
  double ecas = 0.0;
};

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10*log10(1/MSE) over all samples; +inf for identical images.
double psnr(const ImageBuf& a, const ImageBuf& b);

/// Mean SSIM over every valid 11x11 window (Gaussian sigma 1.5) of the
/// BT.601 luma planes, K1 = 0.01, K2 = 0.03, L = 1.
double ssim(const ImageBuf& a, const ImageBuf& b);

double ciede2000(const Lab& x, const Lab& y);
/// Mean per-pixel CIEDE2000 between two sRGB images.
double delta_e_2000(const ImageBuf& a, const ImageBuf& b);

/// Fraction of gt edge pixels whose corrected colour is saturated purple or
/// green. Zero when gt has no edges.
double ecas(const ImageBuf& corrected, const ImageBuf& gt, const EcasConfig& cfg = {});

MetricsReport evaluate_pair(const ImageBuf& corrected, const ImageBuf& gt, const EcasConfig& cfg = {});

struct EvalEntry {
  std::string name;
  MetricsReport report;
};

struct EvalResult {
  std::vector<EvalEntry> entries;        // sorted by name
  std::vector<std::string> unpaired;     // present in only one directory
  MetricsReport aggregate;               // unweighted mean over entries
  EcasConfig config;
};

MetricsReport mean_report(const std::vector<EvalEntry>& entries);

/// Pairs PNGs by relative path. Throws EmptyDataset when nothing pairs up.
EvalResult evaluate_dir(const std::filesystem::path& corrected_dir, const std::filesystem::path& gt_dir,
                        const EcasConfig& cfg = {});

/// One JSON object per image followed by an aggregate object carrying the
/// ECAS configuration. Infinite PSNR is written as the string "inf".
std::string eval_to_jsonl(const EvalResult& result);
std::string eval_to_csv(const EvalResult& result);

}  // namespace fringekit
