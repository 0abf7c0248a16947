#include "fringekit/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <vector>

namespace fringekit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

void on_warning(png_structp, png_const_charp) {}

}  // namespace

ImageBuf read_png(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::Format, "not a PNG file: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_warning);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }

  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Format, "corrupt PNG data: " + path.string());
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<float> planar(n * 3);
  if (depth == 16) {
    for (png_uint_32 y = 0; y < height; ++y) {
      const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
      for (png_uint_32 x = 0; x < width; ++x) {
        for (int c = 0; c < 3; ++c) planar[c * n + y * width + x] = row[x * 3 + c] / 65535.0f;
      }
    }
  } else {
    for (png_uint_32 y = 0; y < height; ++y) {
      for (png_uint_32 x = 0; x < width; ++x) {
        for (int c = 0; c < 3; ++c) planar[c * n + y * width + x] = rows[y][x * 3 + c] / 255.0f;
      }
    }
  }
  return ImageBuf::from_planar(static_cast<int>(width), static_cast<int>(height), 3, std::move(planar));
}

void write_png(const std::filesystem::path& path, const ImageBuf& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw Error(ErrorCode::InvalidArgument, "bit depth must be 8 or 16");
  if (img.empty()) throw Error(ErrorCode::InvalidArgument, "cannot write an empty image");
  const int channels = img.channels();
  const std::size_t w = static_cast<std::size_t>(img.width());
  const std::size_t h = static_cast<std::size_t>(img.height());
  const std::size_t bytes_per_sample = bit_depth / 8;
  const std::size_t stride = w * channels * bytes_per_sample;
  const double scale = bit_depth == 8 ? 255.0 : 65535.0;

  // PNG stores 16-bit samples big-endian.
  std::vector<png_byte> pixels(stride * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::clamp(static_cast<double>(img.at(c, static_cast<int>(x), static_cast<int>(y))), 0.0, 1.0);
        const auto q = static_cast<std::uint32_t>(std::lround(v * scale));
        png_byte* dst = pixels.data() + y * stride + (x * channels + c) * bytes_per_sample;
        if (bit_depth == 8) {
          dst[0] = static_cast<png_byte>(q);
        } else {
          dst[0] = static_cast<png_byte>(q >> 8);
          dst[1] = static_cast<png_byte>(q & 0xff);
        }
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;

  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, on_warning);
  if (png == nullptr) throw Error(ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::Io, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(ErrorCode::Io, "failed flushing " + path.string());
}

}  // namespace fringekit
