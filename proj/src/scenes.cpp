#include "fringekit/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "fringekit/png_io.hpp"
#include "fringekit/rng.hpp"

namespace fringekit {

namespace {

using Rgb = std::array<double, 3>;

constexpr Rgb kBright[] = {
    {0.92, 0.93, 0.95}, {0.80, 0.88, 0.97}, {0.95, 0.90, 0.80},
    {0.85, 0.85, 0.82}, {0.70, 0.82, 0.95}, {0.97, 0.96, 0.92},
};
constexpr Rgb kDark[] = {
    {0.10, 0.09, 0.08}, {0.25, 0.18, 0.12}, {0.15, 0.17, 0.20},
    {0.35, 0.30, 0.25}, {0.05, 0.05, 0.06}, {0.45, 0.32, 0.20},
};
constexpr Rgb kMid[] = {
    {0.55, 0.50, 0.45}, {0.60, 0.45, 0.30}, {0.40, 0.50, 0.62}, {0.65, 0.62, 0.58},
};

template <std::size_t N>
Rgb pick(Rng& rng, const Rgb (&palette)[N]) {
  Rgb c = palette[rng.below(N)];
  const double jitter = rng.uniform(-0.04, 0.04);
  for (auto& v : c) v = std::clamp(v + jitter, 0.0, 1.0);
  return c;
}

struct Canvas {
  int w, h;
  std::vector<Rgb> px;

  void paint(const Rgb& color, auto coverage_at) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double a = coverage_at(x + 0.5, y + 0.5);
        if (a <= 0.0) continue;
        auto& p = px[static_cast<std::size_t>(y) * w + x];
        for (int c = 0; c < 3; ++c) p[c] = (1.0 - a) * p[c] + a * color[c];
      }
    }
  }
};

double coverage(double signed_dist) { return std::clamp(0.5 - signed_dist, 0.0, 1.0); }

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0 ? std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0) : 0.0;
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

ImageBuf make_scene(int width, int height, std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "scene size must be positive");
  Rng rng(seed);
  Canvas cv{width, height, std::vector<Rgb>(static_cast<std::size_t>(width) * height)};

  const Rgb top = pick(rng, kBright);
  const Rgb bottom = rng.uniform01() < 0.5 ? pick(rng, kBright) : pick(rng, kMid);
  for (int y = 0; y < height; ++y) {
    const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) cv.px[static_cast<std::size_t>(y) * width + x][c] = (1 - t) * top[c] + t * bottom[c];
    }
  }

  const double scale = std::min(width, height);
  const int shapes = 3 + static_cast<int>(rng.below(5));
  for (int s = 0; s < shapes; ++s) {
    const Rgb color = rng.uniform01() < 0.75 ? pick(rng, kDark) : pick(rng, kMid);
    switch (rng.below(4)) {
      case 0: {  // block
        const double x0 = rng.uniform(-0.1, 0.8) * width, y0 = rng.uniform(-0.1, 0.8) * height;
        const double x1 = x0 + rng.uniform(0.1, 0.5) * width, y1 = y0 + rng.uniform(0.1, 0.5) * height;
        cv.paint(color, [&](double px, double py) {
          const double d = std::max({x0 - px, px - x1, y0 - py, py - y1});
          return coverage(d);
        });
        break;
      }
      case 1: {  // disc
        const double cx = rng.uniform(0.1, 0.9) * width, cy = rng.uniform(0.1, 0.9) * height;
        const double r = rng.uniform(0.06, 0.25) * scale;
        cv.paint(color, [&](double px, double py) { return coverage(std::hypot(px - cx, py - cy) - r); });
        break;
      }
      default: {  // branch / bar
        const double ax = rng.uniform(0.0, 1.0) * width, ay = rng.uniform(0.0, 1.0) * height;
        const double bx = rng.uniform(0.0, 1.0) * width, by = rng.uniform(0.0, 1.0) * height;
        const double half = rng.uniform(0.01, 0.05) * scale + 0.75;
        cv.paint(color, [&](double px, double py) { return coverage(segment_distance(px, py, ax, ay, bx, by) - half); });
        break;
      }
    }
  }

  const double grain = rng.uniform(0.0, 0.015);
  std::vector<float> planar(static_cast<std::size_t>(width) * height * 3);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grain * rng.normal();
    for (int c = 0; c < 3; ++c) planar[c * n + i] = static_cast<float>(std::clamp(cv.px[i][c] + g, 0.0, 1.0));
  }
  return ImageBuf::from_planar(width, height, 3, std::move(planar));
}

void write_scenes(const std::filesystem::path& dir, int count, int width, int height, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d.png", i);
    write_png(dir / name, make_scene(width, height, mix_seed(seed, static_cast<std::uint64_t>(i))));
  }
}

}  // namespace fringekit
