#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fringekit/pipeline.hpp"

namespace fringekit {

inline constexpr char kModelMagic[8] = {'D', 'C', 'A', 'L', 'U', 'T', '1', '\0'};
inline constexpr std::uint16_t kModelVersion = 1;

/// Layout (all little-endian):
///   magic[8] | u16 version | u32 payload length | u32 CRC32(payload) | payload
/// The payload is a run of tagged sections, each u32 tag | u32 length | body.
/// Known tags: CASP (predictor), LUT5, LUT1, NORM (coordinate normalisation),
/// LOSS (loss weights). Unknown tags are skipped; a newer version is refused.
/// Reals are stored as IEEE binary64 so load(save(m)) == m bit for bit.
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

}  // namespace fringekit
