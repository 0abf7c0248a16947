#include "fringekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fringekit/color.hpp"
#include "fringekit/filter.hpp"
#include "fringekit/log.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/png_io.hpp"

namespace fringekit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void SynthParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, "synth params: " + msg); };
  if (!(alpha_min > 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0)) fail("alpha range must satisfy 0 < min <= max <= 1");
  if (!(width_min >= 1 && width_min <= width_max)) fail("width range must satisfy 1 <= min <= max");
  if (!(rho_min > 0.0 && rho_min <= rho_max && rho_max <= 1.0)) fail("rho range must satisfy 0 < min <= max <= 1");
  if (!(canny_low >= 0.0 && canny_low < canny_high && canny_high <= 1.0)) fail("canny thresholds must satisfy 0 <= low < high <= 1");
  if (blur_sigma && !(*blur_sigma > 0.0)) fail("blur sigma must be > 0");
  for (double c : purple) {
    if (!(c >= 0.0 && c <= 1.0)) fail("purple components must lie in [0,1]");
  }
}

ImageBuf blend_fringe(const ImageBuf& clean, const GrayBuf& mask, double alpha, const std::array<double, 3>& purple) {
  require_channels(clean, 3, "blend_fringe");
  if (mask.width() != clean.width() || mask.height() != clean.height()) {
    throw Error(ErrorCode::ShapeMismatch, "blend_fringe: mask size differs from image");
  }
  ImageBuf out = clean;
  const auto m = mask.data();
  for (int c = 0; c < 3; ++c) {
    auto src = clean.plane(c);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double a = alpha * m[i];
      if (a == 0.0) continue;
      dst[i] = static_cast<float>(std::clamp((1.0 - a) * src[i] + a * purple[c], 0.0, 1.0));
    }
  }
  return out;
}

SynthResult synthesize_fringe(const ImageBuf& clean, const SynthParams& params, Rng& rng) {
  require_channels(clean, 3, "synthesize_fringe");
  params.validate();

  SynthResult res;
  res.record.alpha = rng.uniform(params.alpha_min, params.alpha_max);
  res.record.width = rng.uniform_int(params.width_min, params.width_max);
  res.record.rho = rng.uniform(params.rho_min, params.rho_max);
  res.record.blur_sigma = params.blur_sigma.value_or(res.record.width / 3.0);
  res.record.canny_low = params.canny_low;
  res.record.canny_high = params.canny_high;
  res.mask = GrayBuf(clean.width(), clean.height(), 0.0f);

  const GrayBuf gray = to_grayscale(clean);
  const GrayBuf edges = canny_edges(gray, params.canny_low, params.canny_high);
  std::vector<std::size_t> edge_points;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges.data()[i] != 0.0f) edge_points.push_back(i);
  }
  res.record.edge_pixels = edge_points.size();

  if (edge_points.empty()) {
    res.fringed = clean;
    return res;
  }

  // Partial Fisher-Yates: the first k slots become a uniform sample without
  // replacement.
  const auto k = static_cast<std::size_t>(std::floor(res.record.rho * static_cast<double>(edge_points.size())));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(edge_points.size() - i));
    std::swap(edge_points[i], edge_points[j]);
  }
  res.record.sampled_pixels = k;

  GrayBuf sparse(clean.width(), clean.height(), 0.0f);
  for (std::size_t i = 0; i < k; ++i) sparse.data()[edge_points[i]] = 1.0f;
  const GrayBuf dilated = dilate(sparse, res.record.width / 2);
  res.mask = gaussian_blur(dilated, res.record.blur_sigma);
  res.fringed = blend_fringe(clean, res.mask, res.record.alpha, params.purple);
  return res;
}

std::vector<const SynthRecord*> Manifest::split(const std::string& name) const {
  std::vector<const SynthRecord*> out;
  for (const auto& r : records) {
    if (r.split == name) out.push_back(&r);
  }
  return out;
}

namespace {

ojson record_to_json(const SynthRecord& r) {
  ojson j;
  j["source"] = r.source;
  j["split"] = r.split;
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["alpha"] = r.alpha;
  j["width"] = r.width;
  j["rho"] = r.rho;
  j["blur_sigma"] = r.blur_sigma;
  j["canny_low"] = r.canny_low;
  j["canny_high"] = r.canny_high;
  j["edge_pixels"] = r.edge_pixels;
  j["sampled_pixels"] = r.sampled_pixels;
  j["clean"] = r.clean;
  j["fringed"] = r.fringed;
  return j;
}

SynthRecord record_from_json(const ojson& j) {
  SynthRecord r;
  r.source = j.at("source").get<std::string>();
  r.split = j.at("split").get<std::string>();
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.alpha = j.at("alpha").get<double>();
  r.width = j.at("width").get<int>();
  r.rho = j.at("rho").get<double>();
  r.blur_sigma = j.at("blur_sigma").get<double>();
  r.canny_low = j.at("canny_low").get<double>();
  r.canny_high = j.at("canny_high").get<double>();
  r.edge_pixels = j.at("edge_pixels").get<std::size_t>();
  r.sampled_pixels = j.at("sampled_pixels").get<std::size_t>();
  r.clean = j.at("clean").get<std::string>();
  r.fringed = j.at("fringed").get<std::string>();
  return r;
}

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

std::string numbered(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d.png", index);
  return buf;
}

struct Source {
  std::string rel;
  std::uint64_t hash;
};

}  // namespace

std::string manifest_to_jsonl(const Manifest& manifest) {
  std::string out;
  for (const auto& r : manifest.records) out += record_to_json(r).dump() + "\n";
  for (const auto& w : manifest.warnings) {
    ojson j;
    j["source"] = w.source;
    j["warning"] = w.message;
    out += j.dump() + "\n";
  }
  return out;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = ojson::parse(line);
      if (j.contains("warning")) {
        m.warnings.push_back({j.at("source").get<std::string>(), j.at("warning").get<std::string>()});
      } else {
        m.records.push_back(record_from_json(j));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

Manifest build_dataset(const fs::path& src_dir, const fs::path& out_dir, const SynthParams& params,
                       const SplitFractions& split) {
  params.validate();
  if (split.train < 0 || split.val < 0 || split.test < 0 ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must be non-negative and sum to 1");
  }
  if (!fs::is_directory(src_dir)) throw Error(ErrorCode::Io, "source directory not found: " + src_dir.string());

  std::vector<Source> sources;
  for (const auto& entry : fs::recursive_directory_iterator(src_dir)) {
    if (!entry.is_regular_file() || !is_png(entry.path())) continue;
    const std::string rel = fs::relative(entry.path(), src_dir).generic_string();
    sources.push_back({rel, stable_hash(rel)});
  }
  if (sources.empty()) throw Error(ErrorCode::EmptyDataset, "no PNG images under " + src_dir.string());
  std::sort(sources.begin(), sources.end(),
            [](const Source& a, const Source& b) { return a.hash != b.hash ? a.hash < b.hash : a.rel < b.rel; });

  Manifest manifest;
  std::vector<ImageBuf> images(sources.size());
  std::vector<std::string> decode_errors(sources.size());
  parallel_for(sources.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        images[i] = read_png(src_dir / sources[i].rel);
      } catch (const Error& e) {
        decode_errors[i] = e.what();
      }
    }
  });

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (decode_errors[i].empty()) {
      usable.push_back(i);
    } else {
      log::warn("skipping " + sources[i].rel + ": " + decode_errors[i]);
      manifest.warnings.push_back({sources[i].rel, "decode failed: " + decode_errors[i]});
    }
  }
  if (usable.empty()) throw Error(ErrorCode::EmptyDataset, "no decodable images under " + src_dir.string());

  const std::size_t n = usable.size();
  const auto n_train = static_cast<std::size_t>(std::floor(split.train * n + 1e-9));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(split.val * n + 1e-9)));

  std::error_code ec;
  for (const char* s : {"train", "val", "test"}) {
    fs::create_directories(out_dir / s / "clean", ec);
    if (!ec) fs::create_directories(out_dir / s / "fringed", ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + out_dir.string() + ": " + ec.message());
  }

  manifest.records.resize(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Source& src = sources[usable[k]];
      SynthRecord& rec = manifest.records[k];
      int index;
      if (k < n_train) {
        rec.split = "train";
        index = static_cast<int>(k);
      } else if (k < n_train + n_val) {
        rec.split = "val";
        index = static_cast<int>(k - n_train);
      } else {
        rec.split = "test";
        index = static_cast<int>(k - n_train - n_val);
      }
      const std::uint64_t seed = params.seed ^ src.hash;
      Rng rng(seed);
      SynthResult res = synthesize_fringe(images[usable[k]], params, rng);
      const std::string split_name = rec.split;
      rec = res.record;
      rec.split = split_name;
      rec.index = index;
      rec.source = src.rel;
      rec.seed = seed;
      rec.clean = split_name + "/clean/" + numbered(index);
      rec.fringed = split_name + "/fringed/" + numbered(index);
      write_png(out_dir / rec.clean, images[usable[k]]);
      write_png(out_dir / rec.fringed, res.fringed);
    }
  });

  std::sort(manifest.warnings.begin(), manifest.warnings.end(),
            [](const ManifestWarning& a, const ManifestWarning& b) { return a.source < b.source; });

  const fs::path manifest_path = out_dir / kManifestName;
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + manifest_path.string());
  out << manifest_to_jsonl(manifest);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + manifest_path.string());
  return manifest;
}

}  // namespace fringekit
