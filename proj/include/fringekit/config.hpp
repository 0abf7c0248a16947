#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fringekit/baseline.hpp"
#include "fringekit/metrics.hpp"
#include "fringekit/pipeline.hpp"
#include "fringekit/synth.hpp"
#include "fringekit/train.hpp"

namespace fringekit {

/// Every tunable of the toolkit in one place.
///
/// Files are line-based: `key = value`, `[section]` headers prefix the keys
/// that follow (so `epochs` under `[train]` is `train.epochs`), `#` starts a
/// comment. Strings may be quoted. Keys not listed by config_keys() are
/// rejected so typos fail loudly.
struct RunConfig {
  std::uint64_t seed = 0;
  SynthParams synth;
  SplitFractions split;
  TrainConfig train;
  LossWeights loss;
  CoordNorm norm;
  EcasConfig ecas;
  HeuristicParams heuristic;
  int bench_iters = 5;
};

std::vector<std::string> config_keys();

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies the settings in `text` on top of `base`.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Renders every key with its current value, in config_keys() order.
std::string dump_config(const RunConfig& cfg);

}  // namespace fringekit
