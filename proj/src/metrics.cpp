#include "fringekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "fringekit/filter.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/png_io.hpp"

namespace fringekit {

namespace fs = std::filesystem;

namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
double rad(double d) { return d * std::numbers::pi / 180.0; }

PlaneD luma_plane(const ImageBuf& img) {
  PlaneD y(img.width(), img.height());
  auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) y.data()[i] = luma(r[i], g[i], b[i]);
  return y;
}

// Valid-mode separable correlation with an 11-tap kernel.
PlaneD filter_valid(const PlaneD& p, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int w = p.width(), h = p.height();
  const int ow = w - n + 1, oh = h - n + 1;
  PlaneD tmp(ow, h), out(ow, oh);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * p.at(x + i, y);
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * tmp.at(x, y + i);
      out.at(x, y) = acc;
    }
  }
  return out;
}

bool is_finite_report(double v) { return std::isfinite(v); }

nlohmann::ordered_json report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  if (is_finite_report(r.psnr)) {
    j["psnr"] = r.psnr;
  } else {
    j["psnr"] = r.psnr > 0 ? "inf" : "nan";
  }
  j["ssim"] = r.ssim;
  j["delta_e"] = r.delta_e;
  j["ecas"] = r.ecas;
  return j;
}

std::map<std::string, fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png") continue;
    out.emplace(fs::relative(e.path(), dir).generic_string(), e.path());
  }
  return out;
}

}  // namespace

void EcasConfig::validate() const {
  if (!(tau_edge > 0.0 && tau_edge < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau_edge must lie in (0,1)");
  if (!(tau_sat > 0.0 && tau_sat < 1.0)) throw Error(ErrorCode::InvalidArgument, "tau_sat must lie in (0,1)");
  for (const HueBand& b : {purple, green}) {
    if (b.lo_deg < 0.0 || b.lo_deg >= 360.0 || b.hi_deg < 0.0 || b.hi_deg >= 360.0) {
      throw Error(ErrorCode::InvalidArgument, "hue bands must lie within [0,360)");
    }
  }
  // Sample the circle at a fine step; any shared hue means the bands overlap.
  for (int i = 0; i < 3600; ++i) {
    const double h = i / 3600.0;
    if (purple.contains_unit_hue(h) && green.contains_unit_hue(h)) {
      throw Error(ErrorCode::InvalidArgument, "purple and green hue bands overlap");
    }
  }
}

double psnr(const ImageBuf& a, const ImageBuf& b) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw Error(ErrorCode::InvalidArgument, "psnr: empty image");
  double sse = 0.0;
  auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sse += d * d;
  }
  if (sse == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(static_cast<double>(da.size()) / sse);
}

double ssim(const ImageBuf& a, const ImageBuf& b) {
  require_same_shape(a, b, "ssim");
  require_channels(a, 3, "ssim");
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw Error(ErrorCode::InvalidArgument, "ssim: image smaller than the 11x11 window");
  }
  const std::vector<double> k = gaussian_kernel1d(kSsimSigma);
  const PlaneD x = luma_plane(a), y = luma_plane(b);
  PlaneD xx(x.width(), x.height()), yy(x.width(), x.height()), xy(x.width(), x.height());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx.data()[i] = x.data()[i] * x.data()[i];
    yy.data()[i] = y.data()[i] * y.data()[i];
    xy.data()[i] = x.data()[i] * y.data()[i];
  }
  const PlaneD mx = filter_valid(x, k), my = filter_valid(y, k);
  const PlaneD sxx = filter_valid(xx, k), syy = filter_valid(yy, k), sxy = filter_valid(xy, k);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double ux = mx.data()[i], uy = my.data()[i];
    const double vx = sxx.data()[i] - ux * ux;
    const double vy = syy.data()[i] - uy * uy;
    const double cxy = sxy.data()[i] - ux * uy;
    total += ((2 * ux * uy + kSsimC1) * (2 * cxy + kSsimC2)) / ((ux * ux + uy * uy + kSsimC1) * (vx + vy + kSsimC2));
  }
  return total / static_cast<double>(mx.size());
}

double ciede2000(const Lab& p, const Lab& q) {
  const double c1 = std::hypot(p.a, p.b), c2 = std::hypot(q.a, q.b);
  const double c_bar = 0.5 * (c1 + c2);
  const double c7 = std::pow(c_bar, 7.0);
  const double g = 0.5 * (1.0 - std::sqrt(c7 / (c7 + std::pow(25.0, 7.0))));
  const double a1 = (1.0 + g) * p.a, a2 = (1.0 + g) * q.a;
  const double cp1 = std::hypot(a1, p.b), cp2 = std::hypot(a2, q.b);
  auto hue = [](double b, double a) {
    if (a == 0.0 && b == 0.0) return 0.0;
    double h = deg(std::atan2(b, a));
    return h < 0.0 ? h + 360.0 : h;
  };
  const double hp1 = hue(p.b, a1), hp2 = hue(q.b, a2);

  const double dl = q.l - p.l;
  const double dc = cp2 - cp1;
  double dh = 0.0;
  if (cp1 * cp2 != 0.0) {
    dh = hp2 - hp1;
    if (dh > 180.0) dh -= 360.0;
    else if (dh < -180.0) dh += 360.0;
  }
  const double d_big_h = 2.0 * std::sqrt(cp1 * cp2) * std::sin(rad(dh / 2.0));

  const double l_bar = 0.5 * (p.l + q.l);
  const double cp_bar = 0.5 * (cp1 + cp2);
  double hp_bar = hp1 + hp2;
  if (cp1 * cp2 != 0.0) {
    if (std::abs(hp1 - hp2) <= 180.0) hp_bar *= 0.5;
    else if (hp1 + hp2 < 360.0) hp_bar = 0.5 * (hp1 + hp2 + 360.0);
    else hp_bar = 0.5 * (hp1 + hp2 - 360.0);
  }
  const double t = 1.0 - 0.17 * std::cos(rad(hp_bar - 30.0)) + 0.24 * std::cos(rad(2.0 * hp_bar)) +
                   0.32 * std::cos(rad(3.0 * hp_bar + 6.0)) - 0.20 * std::cos(rad(4.0 * hp_bar - 63.0));
  const double d_theta = 30.0 * std::exp(-std::pow((hp_bar - 275.0) / 25.0, 2.0));
  const double cp7 = std::pow(cp_bar, 7.0);
  const double rc = 2.0 * std::sqrt(cp7 / (cp7 + std::pow(25.0, 7.0)));
  const double l50 = (l_bar - 50.0) * (l_bar - 50.0);
  const double sl = 1.0 + 0.015 * l50 / std::sqrt(20.0 + l50);
  const double sc = 1.0 + 0.045 * cp_bar;
  const double sh = 1.0 + 0.015 * cp_bar * t;
  const double rt = -std::sin(rad(2.0 * d_theta)) * rc;

  const double tl = dl / sl, tc = dc / sc, th = d_big_h / sh;
  return std::sqrt(tl * tl + tc * tc + th * th + rt * tc * th);
}

double delta_e_2000(const ImageBuf& a, const ImageBuf& b) {
  require_same_shape(a, b, "delta_e_2000");
  require_channels(a, 3, "delta_e_2000");
  if (a.empty()) return 0.0;
  const std::size_t n = a.pixel_count();
  std::vector<double> per(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Lab la = srgb_to_lab(a.plane(0)[i], a.plane(1)[i], a.plane(2)[i]);
      const Lab lb = srgb_to_lab(b.plane(0)[i], b.plane(1)[i], b.plane(2)[i]);
      per[i] = ciede2000(la, lb);
    }
  });
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / static_cast<double>(n);
}

double ecas(const ImageBuf& corrected, const ImageBuf& gt, const EcasConfig& cfg) {
  require_same_shape(corrected, gt, "ecas");
  require_channels(gt, 3, "ecas");
  cfg.validate();
  const auto sobel = sobel_gradients(luma_plane(gt));
  double max_mag = 0.0;
  for (double m : sobel.mag.data()) max_mag = std::max(max_mag, m);
  if (max_mag <= 0.0) return 0.0;
  const double thresh = cfg.tau_edge * max_mag;

  std::size_t edges = 0, hits = 0;
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    if (!(sobel.mag.data()[i] > thresh)) continue;
    ++edges;
    const Hsv hsv = rgb_to_hsv(corrected.plane(0)[i], corrected.plane(1)[i], corrected.plane(2)[i]);
    if (hsv.s > cfg.tau_sat && (cfg.purple.contains_unit_hue(hsv.h) || cfg.green.contains_unit_hue(hsv.h))) ++hits;
  }
  return edges == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(edges);
}

MetricsReport evaluate_pair(const ImageBuf& corrected, const ImageBuf& gt, const EcasConfig& cfg) {
  MetricsReport r;
  r.psnr = psnr(corrected, gt);
  r.ssim = ssim(corrected, gt);
  r.delta_e = delta_e_2000(corrected, gt);
  r.ecas = ecas(corrected, gt, cfg);
  return r;
}

MetricsReport mean_report(const std::vector<EvalEntry>& entries) {
  MetricsReport m;
  if (entries.empty()) return m;
  for (const auto& e : entries) {
    m.psnr += e.report.psnr;
    m.ssim += e.report.ssim;
    m.delta_e += e.report.delta_e;
    m.ecas += e.report.ecas;
  }
  const double n = static_cast<double>(entries.size());
  m.psnr /= n;
  m.ssim /= n;
  m.delta_e /= n;
  m.ecas /= n;
  return m;
}

EvalResult evaluate_dir(const fs::path& corrected_dir, const fs::path& gt_dir, const EcasConfig& cfg) {
  cfg.validate();
  const auto corrected = list_pngs(corrected_dir);
  const auto gt = list_pngs(gt_dir);
  EvalResult res;
  res.config = cfg;
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  for (const auto& [name, path] : corrected) {
    auto it = gt.find(name);
    if (it == gt.end()) {
      res.unpaired.push_back(name);
    } else {
      pairs.push_back({name, {path, it->second}});
    }
  }
  for (const auto& [name, path] : gt) {
    if (!corrected.count(name)) res.unpaired.push_back(name);
  }
  std::sort(res.unpaired.begin(), res.unpaired.end());
  if (pairs.empty()) throw Error(ErrorCode::EmptyDataset, "no paired images between the two directories");

  res.entries.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const ImageBuf c = read_png(pairs[i].second.first);
      const ImageBuf g = read_png(pairs[i].second.second);
      res.entries[i] = {pairs[i].first, evaluate_pair(c, g, cfg)};
    }
  });
  res.aggregate = mean_report(res.entries);
  return res;
}

std::string eval_to_jsonl(const EvalResult& result) {
  std::ostringstream os;
  for (const auto& e : result.entries) {
    nlohmann::ordered_json j;
    j["image"] = e.name;
    const nlohmann::ordered_json r = report_json(e.report);
    for (auto it = r.begin(); it != r.end(); ++it) j[it.key()] = it.value();
    os << j.dump() << '\n';
  }
  nlohmann::ordered_json agg;
  agg["aggregate"] = report_json(result.aggregate);
  agg["count"] = result.entries.size();
  agg["unpaired"] = result.unpaired;
  agg["ecas_config"] = {
      {"tau_edge", result.config.tau_edge},
      {"tau_sat", result.config.tau_sat},
      {"purple_hue", {result.config.purple.lo_deg, result.config.purple.hi_deg}},
      {"green_hue", {result.config.green.lo_deg, result.config.green.hi_deg}},
  };
  os << agg.dump() << '\n';
  return os.str();
}

std::string eval_to_csv(const EvalResult& result) {
  std::ostringstream os;
  os.precision(10);
  os << "image,psnr,ssim,delta_e,ecas\n";
  auto row = [&](const std::string& name, const MetricsReport& r) {
    os << name << ',' << r.psnr << ',' << r.ssim << ',' << r.delta_e << ',' << r.ecas << '\n';
  };
  for (const auto& e : result.entries) row(e.name, e.report);
  row("mean", result.aggregate);
  return os.str();
}

}  // namespace fringekit
