#include "fringekit/image.hpp"

#include <cmath>

namespace fringekit {

namespace {

float unit(float v) {
  if (std::isnan(v)) return 0.0f;
  return std::clamp(v, 0.0f, 1.0f);
}

void check_shape(int width, int height, int channels) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidArgument, "negative image dimension");
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::InvalidArgument, "image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

ImageBuf::ImageBuf(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), unit(fill));
}

ImageBuf ImageBuf::from_planar(int width, int height, int channels, std::vector<float> data) {
  check_shape(width, height, channels);
  if (data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorCode::ShapeMismatch, "planar data length does not match width*height*channels");
  }
  ImageBuf img;
  img.width_ = width;
  img.height_ = height;
  img.channels_ = channels;
  img.data_ = std::move(data);
  img.clamp();
  return img;
}

ImageBuf ImageBuf::from_interleaved(int width, int height, int channels, std::span<const float> data) {
  check_shape(width, height, channels);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (data.size() != n * channels) {
    throw Error(ErrorCode::ShapeMismatch, "interleaved data length does not match width*height*channels");
  }
  ImageBuf img(width, height, channels);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) img.data_[c * n + i] = unit(data[i * channels + c]);
  }
  return img;
}

ImageBuf ImageBuf::from_planes(std::span<const GrayBuf> planes) {
  if (planes.empty()) throw Error(ErrorCode::InvalidArgument, "no planes given");
  const int w = planes[0].width();
  const int h = planes[0].height();
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(w) * h * planes.size());
  for (const auto& p : planes) {
    if (p.width() != w || p.height() != h) throw Error(ErrorCode::ShapeMismatch, "plane sizes differ");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  return from_planar(w, h, static_cast<int>(planes.size()), std::move(data));
}

GrayBuf ImageBuf::channel(int c) const {
  if (c < 0 || c >= channels_) throw Error(ErrorCode::InvalidArgument, "channel index out of range");
  auto p = plane(c);
  return GrayBuf(width_, height_, std::vector<float>(p.begin(), p.end()));
}

std::vector<float> ImageBuf::interleaved() const {
  const std::size_t n = pixel_count();
  std::vector<float> out(n * channels_);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < channels_; ++c) out[i * channels_ + c] = data_[c * n + i];
  }
  return out;
}

void ImageBuf::clamp() {
  for (auto& v : data_) v = unit(v);
}

void require_channels(const ImageBuf& img, int channels, const char* what) {
  if (img.channels() != channels) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected " + std::to_string(channels) +
                                               " channels, got " + std::to_string(img.channels()));
  }
}

void require_same_shape(const ImageBuf& a, const ImageBuf& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": image shapes differ");
}

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::SingularTransform: return "singular_transform";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::EmptyDataset: return "empty_dataset";
    case ErrorCode::NumericalFailure: return "numerical_failure";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace fringekit
