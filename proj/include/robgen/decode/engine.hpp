#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robgen/checker/checker.hpp"
#include "robgen/decode/frame.hpp"
#include "robgen/decode/provider.hpp"

namespace robgen::decode {

struct LineState {
  bool at_line_start = true;
  bool seen_non_ws_on_line = false;
  std::uint32_t current_line_index = 1;

  // Advances over emitted text; returns true when the text put the first
  // non-whitespace character on some line.
  bool advance(std::string_view text);
};

enum class StopReason { Eos, MaxTokens, ProviderExhausted };

std::string_view to_string(StopReason r) noexcept;

struct Intervention {
  std::size_t step = 0;
  std::uint32_t line = 1;
  std::size_t pre_rank = 0;
  double delta_applied = 0.0;
  bool changed_choice = false;
};

struct DecodeRecord {
  std::vector<TokenEntry> emitted;
  std::string text;
  std::vector<Intervention> interventions;
  StopReason stop_reason = StopReason::Eos;
  std::optional<std::size_t> divergence_step;
  std::size_t steps = 0;
  std::size_t checker_calls = 0;
  std::size_t checker_failures = 0;
  std::size_t line_starts = 1;
};

void to_json(nlohmann::json& j, const DecodeRecord& r);

struct DecodeRequest {
  std::string prompt;     // handed to the provider
  std::string signature;  // prepended to what the checker sees
  // Sees every step's unadjusted frame and the token chosen from it.
  std::function<void(const LogitFrame&, const TokenEntry&)> on_step;
};

// Decodes with interventions off and records every frame, producing a
// trace that replays to the same text.
Trace record_trace(TokenProvider& provider, const std::string& prompt, std::size_t max_tokens);

// Greedy decoding with the selective if-boost. `checker` is required in
// Mode::Full and ignored otherwise. Provider failures are rethrown as
// ProviderError naming the step; checker failures count as "no".
DecodeRecord run_decode(TokenProvider& provider, checker::Checker* checker, const DecodeRequest& request,
                        const InterventionConfig& cfg);

}  // namespace robgen::decode
