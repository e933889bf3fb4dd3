#include "robgen/log.hpp"

#include <iostream>
#include <mutex>

namespace robgen::log {
namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Level& min_level() {
  static Level level = Level::Warning;
  return level;
}

const char* label(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warning: return "warning";
    case Level::Error: return "error";
  }
  return "?";
}

Sink& current_sink() {
  static Sink sink = [](Level level, std::string_view message) {
    std::cerr << "[" << label(level) << "] " << message << '\n';
  };
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  Sink previous = std::move(current_sink());
  current_sink() = std::move(sink);
  return previous;
}

void set_min_level(Level level) {
  std::lock_guard lock(sink_mutex());
  min_level() = level;
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (level < min_level() || !current_sink()) return;
  current_sink()(level, message);
}

}  // namespace robgen::log
