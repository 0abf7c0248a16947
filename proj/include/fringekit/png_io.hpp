#pragma once

#include <filesystem>

#include "fringekit/image.hpp"

namespace fringekit {

/// Decodes an 8- or 16-bit PNG into a 3-channel image (gray is replicated,
/// alpha dropped, palettes expanded). Samples are divided by 255 or 65535.
ImageBuf read_png(const std::filesystem::path& path);

/// Encodes with round-to-nearest quantization. bit_depth is 8 or 16.
void write_png(const std::filesystem::path& path, const ImageBuf& img, int bit_depth = 8);

}  // namespace fringekit
