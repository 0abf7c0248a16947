#pragma once

#include <cstdint>
#include <filesystem>

#include "fringekit/image.hpp"

namespace fringekit {

/// Procedural clean scene: a smooth natural-toned background with dark and
/// bright anti-aliased shapes (bars, branches, discs, blocks) giving
/// high-contrast edges, plus faint texture. Palette avoids saturated purple
/// and green so clean scenes score near zero on fringe metrics.
ImageBuf make_scene(int width, int height, std::uint64_t seed);

/// Writes `count` scenes as scene_NNNN.png into dir.
void write_scenes(const std::filesystem::path& dir, int count, int width, int height, std::uint64_t seed);

}  // namespace fringekit
