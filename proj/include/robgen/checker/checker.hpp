#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>

namespace robgen::checker {

enum class Source { Heuristic, Oracle, Remote };

std::string_view to_string(Source s) noexcept;

struct Decision {
  bool needs_if = false;
  double score = 0.0;
  Source source = Source::Heuristic;
};

// What the decoder knows when it asks: signature plus generated code up to a
// line boundary, and the 1-based index of the line about to start.
struct Query {
  std::string prefix;
  std::uint32_t line_index = 1;
};

class Checker {
 public:
  virtual ~Checker() = default;
  virtual Decision predict(const Query& query) = 0;
};

struct HeuristicOptions {
  // Also predict an entry guard for int/long parameters named like an
  // index (index, idx, pos, offset).
  bool guard_index_params = false;
};

class HeuristicChecker final : public Checker {
 public:
  explicit HeuristicChecker(HeuristicOptions options = {}) : options_(options) {}
  Decision predict(const Query& query) override;

 private:
  HeuristicOptions options_;
};

// Scripted answers by line index; unscripted lines answer false.
class OracleChecker final : public Checker {
 public:
  explicit OracleChecker(std::map<std::uint32_t, bool> script = {}) : script_(std::move(script)) {}
  Decision predict(const Query& query) override;

 private:
  std::map<std::uint32_t, bool> script_;
};

struct RemoteOptions {
  std::string url;  // e.g. http://127.0.0.1:8088/predict
  int timeout_ms = 2000;
};

// POSTs {"prefix": ...} and expects {"needs_if": bool, "score": number}.
// Transport failures, timeouts and malformed bodies answer false with a
// logged warning.
class RemoteChecker final : public Checker {
 public:
  explicit RemoteChecker(RemoteOptions options);
  ~RemoteChecker() override;
  Decision predict(const Query& query) override;

  std::size_t failures() const { return failures_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t failures_ = 0;
};

}  // namespace robgen::checker
