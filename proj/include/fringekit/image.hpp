#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fringekit/error.hpp"

namespace fringekit {

/// A single row-major plane of reals. No range invariant: planes carry
/// signed gradients, CAS channels and masks alike.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, T fill = T{})
      : width_(checked_dim(width)), height_(checked_dim(height)),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  Plane(int width, int height, std::vector<T> data)
      : width_(checked_dim(width)), height_(checked_dim(height)), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw Error(ErrorCode::ShapeMismatch, "plane data length does not match width*height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  /// Replicate-border read.
  T clamped(int x, int y) const {
    return data_[index(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1))];
  }

  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const Plane<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Plane&) const = default;

 private:
  static int checked_dim(int d) {
    if (d < 0) throw Error(ErrorCode::InvalidArgument, "negative image dimension");
    return d;
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayBuf = Plane<float>;
using PlaneD = Plane<double>;

template <typename To, typename From>
Plane<To> plane_cast(const Plane<From>& p) {
  std::vector<To> out(p.data().begin(), p.data().end());
  return Plane<To>(p.width(), p.height(), std::move(out));
}

/// Planar (channel-major) image with samples in [0,1]. Every constructor
/// clamps; writers through at()/plane() are expected to stay in range or
/// call clamp() afterwards.
class ImageBuf {
 public:
  ImageBuf() = default;
  ImageBuf(int width, int height, int channels, float fill = 0.0f);

  /// Takes ownership of planar data (plane 0, then plane 1, ...).
  static ImageBuf from_planar(int width, int height, int channels, std::vector<float> data);
  static ImageBuf from_interleaved(int width, int height, int channels, std::span<const float> data);
  static ImageBuf from_planes(std::span<const GrayBuf> planes);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int c, int x, int y) { return data_[offset(c, x, y)]; }
  float at(int c, int x, int y) const { return data_[offset(c, x, y)]; }

  std::span<float> plane(int c) { return {data_.data() + c * pixel_count(), pixel_count()}; }
  std::span<const float> plane(int c) const { return {data_.data() + c * pixel_count(), pixel_count()}; }

  GrayBuf channel(int c) const;
  std::vector<float> interleaved() const;

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  void clamp();
  bool same_shape(const ImageBuf& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  bool operator==(const ImageBuf&) const = default;

 private:
  std::size_t offset(int c, int x, int y) const noexcept {
    return static_cast<std::size_t>(c) * pixel_count() +
           static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

void require_channels(const ImageBuf& img, int channels, const char* what);
void require_same_shape(const ImageBuf& a, const ImageBuf& b, const char* what);

}  // namespace fringekit
