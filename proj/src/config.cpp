#include "fringekit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fringekit {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) return s.substr(1, s.size() - 2);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw Error(ErrorCode::Config, "invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                                     expected + ")");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

template <typename Int>
Int to_int(std::string_view key, std::string_view v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::array<double, 3> to_rgb(std::string_view key, std::string_view v) {
  std::array<double, 3> out{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const auto comma = v.find(',', start);
    if ((i < 2) == (comma == std::string_view::npos)) bad_value(key, v, "three comma-separated numbers");
    out[i] = to_double(key, trim(v.substr(start, comma == std::string_view::npos ? v.size() - start : comma - start)));
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Field real(Member m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) { m(c) = to_double(k, v); },
          [m](const RunConfig& c) { return fmt(m(const_cast<RunConfig&>(c))); }};
}

template <typename Member>
Field integer(Member m) {
  return {[m](RunConfig& c, std::string_view k, std::string_view v) {
            m(c) = to_int<std::remove_reference_t<decltype(m(c))>>(k, v);
          },
          [m](const RunConfig& c) { return std::to_string(m(const_cast<RunConfig&>(c))); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    t.emplace_back("seed", integer([](RunConfig& c) -> std::uint64_t& { return c.seed; }));

    t.emplace_back("synth.alpha_min", real([](RunConfig& c) -> double& { return c.synth.alpha_min; }));
    t.emplace_back("synth.alpha_max", real([](RunConfig& c) -> double& { return c.synth.alpha_max; }));
    t.emplace_back("synth.width_min", integer([](RunConfig& c) -> int& { return c.synth.width_min; }));
    t.emplace_back("synth.width_max", integer([](RunConfig& c) -> int& { return c.synth.width_max; }));
    t.emplace_back("synth.rho_min", real([](RunConfig& c) -> double& { return c.synth.rho_min; }));
    t.emplace_back("synth.rho_max", real([](RunConfig& c) -> double& { return c.synth.rho_max; }));
    t.emplace_back("synth.canny_low", real([](RunConfig& c) -> double& { return c.synth.canny_low; }));
    t.emplace_back("synth.canny_high", real([](RunConfig& c) -> double& { return c.synth.canny_high; }));
    t.emplace_back("synth.blur_sigma",
                   Field{[](RunConfig& c, std::string_view k, std::string_view v) {
                           if (v == "auto") {
                             c.synth.blur_sigma.reset();
                           } else {
                             c.synth.blur_sigma = to_double(k, v);
                           }
                         },
                         [](const RunConfig& c) { return c.synth.blur_sigma ? fmt(*c.synth.blur_sigma) : "auto"; }});
    t.emplace_back("synth.purple",
                   Field{[](RunConfig& c, std::string_view k, std::string_view v) { c.synth.purple = to_rgb(k, v); },
                         [](const RunConfig& c) {
                           return fmt(c.synth.purple[0]) + "," + fmt(c.synth.purple[1]) + "," + fmt(c.synth.purple[2]);
                         }});
    t.emplace_back("split.train", real([](RunConfig& c) -> double& { return c.split.train; }));
    t.emplace_back("split.val", real([](RunConfig& c) -> double& { return c.split.val; }));
    t.emplace_back("split.test", real([](RunConfig& c) -> double& { return c.split.test; }));

    t.emplace_back("train.epochs", integer([](RunConfig& c) -> int& { return c.train.epochs; }));
    t.emplace_back("train.batch_size", integer([](RunConfig& c) -> int& { return c.train.batch_size; }));
    t.emplace_back("train.lr", real([](RunConfig& c) -> double& { return c.train.lr; }));
    t.emplace_back("train.weight_decay", real([](RunConfig& c) -> double& { return c.train.weight_decay; }));
    t.emplace_back("train.beta1", real([](RunConfig& c) -> double& { return c.train.beta1; }));
    t.emplace_back("train.beta2", real([](RunConfig& c) -> double& { return c.train.beta2; }));
    t.emplace_back("train.eps", real([](RunConfig& c) -> double& { return c.train.eps; }));
    t.emplace_back("train.crop", integer([](RunConfig& c) -> int& { return c.train.crop; }));
    t.emplace_back("train.fit_features",
                   Field{[](RunConfig& c, std::string_view k, std::string_view v) { c.train.fit_features = to_bool(k, v); },
                         [](const RunConfig& c) { return std::string(c.train.fit_features ? "true" : "false"); }});

    t.emplace_back("loss.l1", real([](RunConfig& c) -> double& { return c.loss.l1; }));
    t.emplace_back("loss.perceptual", real([](RunConfig& c) -> double& { return c.loss.perceptual; }));
    t.emplace_back("loss.chroma", real([](RunConfig& c) -> double& { return c.loss.chroma; }));
    t.emplace_back("loss.smooth", real([](RunConfig& c) -> double& { return c.loss.smooth; }));
    t.emplace_back("loss.align", real([](RunConfig& c) -> double& { return c.loss.align; }));

    t.emplace_back("lut.lum_lo", real([](RunConfig& c) -> double& { return c.norm.lum_lo; }));
    t.emplace_back("lut.lum_hi", real([](RunConfig& c) -> double& { return c.norm.lum_hi; }));
    t.emplace_back("lut.g_max", real([](RunConfig& c) -> double& { return c.norm.g_max; }));

    t.emplace_back("ecas.tau_edge", real([](RunConfig& c) -> double& { return c.ecas.tau_edge; }));
    t.emplace_back("ecas.tau_sat", real([](RunConfig& c) -> double& { return c.ecas.tau_sat; }));
    t.emplace_back("ecas.purple_lo", real([](RunConfig& c) -> double& { return c.ecas.purple.lo_deg; }));
    t.emplace_back("ecas.purple_hi", real([](RunConfig& c) -> double& { return c.ecas.purple.hi_deg; }));
    t.emplace_back("ecas.green_lo", real([](RunConfig& c) -> double& { return c.ecas.green.lo_deg; }));
    t.emplace_back("ecas.green_hi", real([](RunConfig& c) -> double& { return c.ecas.green.hi_deg; }));

    t.emplace_back("heuristic.tau_edge", real([](RunConfig& c) -> double& { return c.heuristic.tau_edge; }));
    t.emplace_back("heuristic.near_radius", integer([](RunConfig& c) -> int& { return c.heuristic.near_radius; }));
    t.emplace_back("heuristic.delta", real([](RunConfig& c) -> double& { return c.heuristic.delta; }));
    t.emplace_back("heuristic.strength", real([](RunConfig& c) -> double& { return c.heuristic.strength; }));

    t.emplace_back("bench.iters", integer([](RunConfig& c) -> int& { return c.bench_iters; }));
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : fields()) keys.push_back(k);
  return keys;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& [k, f] : fields()) {
    if (k == key) {
      f.set(cfg, key, unquote(trim(value)));
      return;
    }
  }
  throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = (section.empty() ? "" : section + ".") + std::string(trim(line.substr(0, eq)));
    apply_setting(base, key, line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace fringekit
