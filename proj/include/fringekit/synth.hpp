#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fringekit/image.hpp"
#include "fringekit/rng.hpp"

namespace fringekit {

/// Randomization ranges for fringe synthesis. The defaults are toolkit
/// choices; every drawn value is written to the manifest.
struct SynthParams {
  double alpha_min = 0.3;
  double alpha_max = 0.8;
  int width_min = 3;
  int width_max = 9;
  double rho_min = 0.2;
  double rho_max = 0.6;
  double canny_low = 0.1;
  double canny_high = 0.3;
  /// Mask blur; unset means width / 3.
  std::optional<double> blur_sigma;
  std::array<double, 3> purple{0.6, 0.0, 0.8};
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthRecord {
  std::string source;
  std::string split;
  int index = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  int width = 0;
  double rho = 0.0;
  double blur_sigma = 0.0;
  double canny_low = 0.0;
  double canny_high = 0.0;
  std::size_t edge_pixels = 0;
  std::size_t sampled_pixels = 0;
  std::string clean;
  std::string fringed;
};

struct SynthResult {
  ImageBuf fringed;
  SynthRecord record;
  GrayBuf mask;  // the blurred blend mask; all zero on the no-edge branch
};

/// Blends `purple` into `clean` with per-pixel weight alpha * mask, then clips.
ImageBuf blend_fringe(const ImageBuf& clean, const GrayBuf& mask, double alpha, const std::array<double, 3>& purple);

/// One pass of the synthesis pipeline: draw (alpha, width, rho), find Canny
/// edges on the grayscale image, keep floor(rho * |edges|) of them, dilate
/// to radius floor(width / 2), blur, blend. With no edges the clean image is
/// returned untouched.
SynthResult synthesize_fringe(const ImageBuf& clean, const SynthParams& params, Rng& rng);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct ManifestWarning {
  std::string source;
  std::string message;
};

struct Manifest {
  std::vector<SynthRecord> records;
  std::vector<ManifestWarning> warnings;

  std::vector<const SynthRecord*> split(const std::string& name) const;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Synthesizes a paired dataset from every PNG below src_dir. Writes
/// out_dir/{train,val,test}/{clean,fringed}/NNNN.png and out_dir/manifest.jsonl.
/// Images are ordered by a stable hash of their relative path, so the split
/// does not depend on directory listing order; each image's RNG seed is
/// params.seed XOR that hash.
Manifest build_dataset(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir,
                       const SynthParams& params, const SplitFractions& split);

std::string manifest_to_jsonl(const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace fringekit
