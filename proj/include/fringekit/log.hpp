#pragma once

#include <string_view>

namespace fringekit::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Reads FRINGEKIT_LOG (error|warn|info|debug) once; defaults to warn.
Level level();
void set_level(Level lvl);

void write(Level lvl, std::string_view msg);

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace fringekit::log
