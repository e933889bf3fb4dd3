#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "robgen/decode/frame.hpp"

namespace robgen::decode {

struct DecodeContext {
  std::size_t step = 0;
  std::string_view text;  // everything emitted so far
};

// Source of per-step candidate frames. One instance per decode session.
class TokenProvider {
 public:
  virtual ~TokenProvider() = default;

  // Called once before the first step.
  virtual void start(const std::string& prompt) { (void)prompt; }
  // Frame for the next step, or nothing when the provider has run out.
  virtual std::optional<LogitFrame> next_frame(const DecodeContext& ctx) = 0;
  // The token the decoder chose for the frame just returned.
  virtual void accept(const TokenEntry& chosen) { (void)chosen; }

  virtual std::optional<TokenId> eos_id() const = 0;
  virtual Vocabulary vocabulary() const = 0;
  // Step at which the provider could no longer follow the decoder.
  virtual std::optional<std::size_t> divergence_step() const { return std::nullopt; }
};

// Table-driven n-gram model. Token ids are vocabulary indices; the context
// is "<s>" followed by the emitted token texts, and the table key is the
// last `order` of those joined by U+001F.
struct ToyLmModel {
  std::vector<std::string> vocab;
  std::string eos;
  std::size_t order = 1;
  std::map<std::string, std::vector<double>> table;
  std::vector<double> fallback;  // "default" in the file

  static ToyLmModel from_json(const nlohmann::json& j);
  static ToyLmModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kKeySep = "\x1f";

std::string toy_key(const std::vector<std::string>& history, std::size_t order);

class ToyLmProvider final : public TokenProvider {
 public:
  explicit ToyLmProvider(ToyLmModel model, std::size_t top_k = 30);

  void start(const std::string& prompt) override;
  std::optional<LogitFrame> next_frame(const DecodeContext& ctx) override;
  void accept(const TokenEntry& chosen) override;
  std::optional<TokenId> eos_id() const override { return eos_; }
  Vocabulary vocabulary() const override;

  const ToyLmModel& model() const { return model_; }

 private:
  ToyLmModel model_;
  std::size_t top_k_;
  TokenId eos_;
  std::vector<std::string> history_;
};

struct TraceStep {
  LogitFrame frame;
  TokenId chosen_id = 0;
};

struct Trace {
  std::optional<TokenId> eos_id;
  std::string model;
  std::vector<TraceStep> steps;

  static Trace load(const std::filesystem::path& path);
  static Trace from_rows(const std::vector<nlohmann::json>& rows);
  std::vector<nlohmann::json> to_rows() const;
};

// Replays recorded frames. When the decoder picks something other than the
// recorded token the recorded continuation no longer applies, so the next
// request returns nothing and divergence_step() reports where it happened.
class TraceReplayProvider final : public TokenProvider {
 public:
  explicit TraceReplayProvider(Trace trace);

  void start(const std::string& prompt) override;
  std::optional<LogitFrame> next_frame(const DecodeContext& ctx) override;
  void accept(const TokenEntry& chosen) override;
  std::optional<TokenId> eos_id() const override { return trace_.eos_id; }
  Vocabulary vocabulary() const override;
  std::optional<std::size_t> divergence_step() const override { return divergence_; }

 private:
  Trace trace_;
  std::size_t cursor_ = 0;
  std::optional<std::size_t> divergence_;
};

}  // namespace robgen::decode
