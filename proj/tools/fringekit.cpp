// fringekit command-line front end.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fringekit/baseline.hpp"
#include "fringekit/config.hpp"
#include "fringekit/log.hpp"
#include "fringekit/metrics.hpp"
#include "fringekit/model_io.hpp"
#include "fringekit/parallel.hpp"
#include "fringekit/pipeline.hpp"
#include "fringekit/png_io.hpp"
#include "fringekit/rng.hpp"
#include "fringekit/scenes.hpp"
#include "fringekit/synth.hpp"
#include "fringekit/train.hpp"

namespace fs = std::filesystem;
using namespace fringekit;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  int threads = 0;
  std::vector<std::string> overrides;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Config, "--set expects key=value, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.synth.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.train.ecas = cfg.ecas;
  log::debug("resolved config:\n" + dump_config(cfg));
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  os << text;
}

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

// Maps every PNG below `in` (or `in` itself) to its output path below `out`.
std::vector<std::pair<fs::path, fs::path>> io_pairs(const fs::path& in, const fs::path& out) {
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(in)) {
    for (const auto& e : fs::recursive_directory_iterator(in)) {
      if (e.is_regular_file() && is_png(e.path())) pairs.emplace_back(e.path(), out / fs::relative(e.path(), in));
    }
    std::sort(pairs.begin(), pairs.end());
    if (pairs.empty()) throw Error(ErrorCode::EmptyDataset, "no PNG files under " + in.string());
  } else {
    if (!fs::exists(in)) throw Error(ErrorCode::Io, "no such file: " + in.string());
    pairs.emplace_back(in, out);
  }
  return pairs;
}

void write_output(const fs::path& path, const ImageBuf& img, int bits) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_png(path, img, bits);
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fringekit: purple-fringe synthesis, correction and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->group("Global");
  app.add_option("--config", g.config_path, "key = value config file")->check(CLI::ExistingFile)->group("Global");
  app.add_option("--threads", g.threads, "Worker threads (default: logical cores)")->group("Global");
  app.add_option("--set", g.overrides, "Override a config key (key=value), repeatable")->group("Global");

  // scenes
  fs::path scenes_out;
  int scenes_count = 40, scenes_w = 128, scenes_h = 128;
  auto* scenes = app.add_subcommand("scenes", "Write procedural clean scenes");
  scenes->add_option("--out", scenes_out, "Output directory")->required();
  scenes->add_option("--count", scenes_count, "Number of scenes")->check(CLI::PositiveNumber);
  scenes->add_option("--width", scenes_w, "Scene width")->check(CLI::PositiveNumber);
  scenes->add_option("--height", scenes_h, "Scene height")->check(CLI::PositiveNumber);

  // synth
  fs::path synth_src, synth_out;
  auto* synth = app.add_subcommand("synth", "Build a paired fringed/clean dataset");
  synth->add_option("src", synth_src, "Directory of clean PNGs")->required()->check(CLI::ExistingDirectory);
  synth->add_option("--out", synth_out, "Dataset directory")->required();

  // train
  fs::path train_data, train_out, train_log, train_init;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a synthesized dataset");
  train_cmd->add_option("dataset", train_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--out", train_out, "Model file to write")->required();
  train_cmd->add_option("--log", train_log, "Epoch log (JSON lines); default <out>.log.jsonl");
  train_cmd->add_option("--init", train_init, "Start from an existing model")->check(CLI::ExistingFile);

  // correct
  fs::path correct_model, correct_in, correct_out;
  int correct_bits = 8;
  auto* correct = app.add_subcommand("correct", "Correct an image or a directory of images");
  correct->add_option("input", correct_in, "PNG file or directory")->required();
  correct->add_option("--model", correct_model, "Model file")->required()->check(CLI::ExistingFile);
  correct->add_option("--out", correct_out, "Output file or directory")->required();
  correct->add_option("--bits", correct_bits, "Output bit depth")->check(CLI::IsMember({8, 16}));

  // eval
  fs::path eval_corrected, eval_gt, eval_out, eval_csv;
  auto* eval = app.add_subcommand("eval", "Score corrected images against ground truth");
  eval->add_option("corrected", eval_corrected, "Directory of corrected PNGs")->required();
  eval->add_option("gt", eval_gt, "Directory of ground-truth PNGs")->required();
  eval->add_option("--out", eval_out, "JSON-lines report (default: stdout)");
  eval->add_option("--csv", eval_csv, "Also write a CSV table");

  // defringe
  fs::path defringe_in, defringe_out;
  std::string defringe_method = "heuristic";
  int defringe_bits = 8;
  auto* defringe = app.add_subcommand("defringe", "Classical defringe baseline");
  defringe->add_option("input", defringe_in, "PNG file or directory")->required();
  defringe->add_option("--out", defringe_out, "Output file or directory")->required();
  defringe->add_option("--method", defringe_method, "Correction method")->check(CLI::IsMember({"heuristic"}));
  defringe->add_option("--bits", defringe_bits, "Output bit depth")->check(CLI::IsMember({8, 16}));

  // bench
  fs::path bench_model, bench_out;
  std::string bench_res = "both";
  std::optional<int> bench_iters;
  auto* bench = app.add_subcommand("bench", "Time correct_image at 2K and 4K");
  bench->add_option("--model", bench_model, "Model file (default: identity model)")->check(CLI::ExistingFile);
  bench->add_option("--resolution", bench_res, "2k, 4k or both")->check(CLI::IsMember({"2k", "4k", "both"}));
  bench->add_option("--iters", bench_iters, "Timed iterations per resolution")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Write the JSON report here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    set_thread_count(g.threads > 0 ? g.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
    const RunConfig cfg = resolve_config(g);

    if (*scenes) {
      write_scenes(scenes_out, scenes_count, scenes_w, scenes_h, cfg.seed);
      std::cout << "wrote " << scenes_count << " scenes to " << scenes_out.string() << '\n';
    } else if (*synth) {
      const Manifest m = build_dataset(synth_src, synth_out, cfg.synth, cfg.split);
      std::cout << "synthesized " << m.records.size() << " pairs (" << m.split("train").size() << " train, "
                << m.split("val").size() << " val, " << m.split("test").size() << " test), " << m.warnings.size()
                << " warnings\n";
    } else if (*train_cmd) {
      Model model = train_init.empty() ? Model::identity(cfg.seed) : load_model(train_init);
      model.weights = cfg.loss;
      model.norm = cfg.norm;
      const PairSet train_set = load_split(train_data, "train");
      const PairSet val_set = load_split(train_data, "val");
      const fs::path log_path = train_log.empty() ? fs::path(train_out.string() + ".log.jsonl") : train_log;
      if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
      std::ofstream log_os(log_path, std::ios::trunc);
      if (!log_os) throw Error(ErrorCode::Io, "cannot write " + log_path.string());
      const TrainResult res = train(model, train_set, val_set, cfg.train, [&](const EpochLog& e) {
        log_os << epoch_to_json(e) << '\n';
        log_os.flush();
      });
      if (train_out.has_parent_path()) fs::create_directories(train_out.parent_path());
      save_model(train_out, res.model);
      std::cout << "trained " << res.log.size() << " epochs on " << train_set.size() << " pairs; model "
                << train_out.string() << ", log " << log_path.string() << '\n';
    } else if (*correct) {
      const Model model = load_model(correct_model);
      const auto pairs = io_pairs(correct_in, correct_out);
      for (const auto& [in, out] : pairs) write_output(out, correct_image(model, read_png(in)), correct_bits);
      std::cout << "corrected " << pairs.size() << " image(s)\n";
    } else if (*eval) {
      const EvalResult res = evaluate_dir(eval_corrected, eval_gt, cfg.ecas);
      for (const auto& u : res.unpaired) log::warn("unpaired image: " + u);
      const std::string report = eval_to_jsonl(res);
      if (eval_out.empty()) {
        std::cout << report;
      } else {
        write_text(eval_out, report);
      }
      if (!eval_csv.empty()) write_text(eval_csv, eval_to_csv(res));
    } else if (*defringe) {
      cfg.heuristic.validate();
      const auto pairs = io_pairs(defringe_in, defringe_out);
      for (const auto& [in, out] : pairs) write_output(out, heuristic_defringe(read_png(in), cfg.heuristic), defringe_bits);
      std::cout << "defringed " << pairs.size() << " image(s)\n";
    } else if (*bench) {
      const Model model = bench_model.empty() ? Model::identity(cfg.seed) : load_model(bench_model);
      const int iters = bench_iters.value_or(cfg.bench_iters);
      std::vector<std::pair<std::string, std::pair<int, int>>> sizes;
      if (bench_res != "4k") sizes.push_back({"2k", {2048, 1080}});
      if (bench_res != "2k") sizes.push_back({"4k", {3840, 2160}});
      nlohmann::ordered_json report;
      report["threads"] = thread_count();
      report["results"] = nlohmann::ordered_json::array();
      for (const auto& [name, wh] : sizes) {
        Rng rng(mix_seed(cfg.seed, stable_hash(name)));
        ImageBuf img(wh.first, wh.second, 3);
        for (float& v : img.data()) v = static_cast<float>(rng.uniform01());
        correct_image(model, img);  // warm-up
        std::vector<double> times;
        for (int i = 0; i < iters; ++i) {
          const auto t0 = std::chrono::steady_clock::now();
          const ImageBuf out = correct_image(model, img);
          times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        nlohmann::ordered_json r;
        r["resolution"] = name;
        r["width"] = wh.first;
        r["height"] = wh.second;
        r["iters"] = iters;
        r["times_s"] = times;
        r["median_s"] = percentile(times, 0.5);
        r["p95_s"] = percentile(times, 0.95);
        report["results"].push_back(r);
      }
      std::cout << report.dump(2) << '\n';
      if (!bench_out.empty()) write_text(bench_out, report.dump(2) + "\n");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
