#include "fringekit/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace fringekit::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("FRINGEKIT_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string v(env);
  if (v == "error") return Level::Error;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

std::atomic<int>& current() {
  static std::atomic<int> lvl{static_cast<int>(parse_env())};
  return lvl;
}

constexpr const char* kTags[] = {"error", "warn", "info", "debug"};

}  // namespace

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level lvl) { current().store(static_cast<int>(lvl)); }

void write(Level lvl, std::string_view msg) {
  if (static_cast<int>(lvl) > current().load()) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "[" << kTags[static_cast<int>(lvl)] << "] " << msg << '\n';
}

}  // namespace fringekit::log
