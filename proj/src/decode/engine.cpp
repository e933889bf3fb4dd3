#include "robgen/decode/engine.hpp"

#include <map>

#include "robgen/error.hpp"
#include "robgen/log.hpp"

namespace robgen::decode {

bool LineState::advance(std::string_view text) {
  bool started = false;
  for (char c : text) {
    if (c == '\n') {
      ++current_line_index;
      at_line_start = true;
      seen_non_ws_on_line = false;
    } else if (c != ' ' && c != '\t' && c != '\r' && c != '\f') {
      if (at_line_start) started = true;
      at_line_start = false;
      seen_non_ws_on_line = true;
    }
  }
  return started;
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::Eos: return "eos";
    case StopReason::MaxTokens: return "max_tokens";
    case StopReason::ProviderExhausted: return "provider_exhausted";
  }
  return "eos";
}

void to_json(nlohmann::json& j, const DecodeRecord& r) {
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& i : r.interventions)
    iv.push_back({{"step", i.step},
                  {"line", i.line},
                  {"pre_rank", i.pre_rank},
                  {"delta_applied", i.delta_applied},
                  {"changed_choice", i.changed_choice}});
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : r.emitted) tokens.push_back({{"id", t.token_id}, {"text", t.text}});
  j = {{"text", r.text},
       {"tokens", tokens},
       {"interventions", iv},
       {"stop_reason", to_string(r.stop_reason)},
       {"steps", r.steps},
       {"checker_calls", r.checker_calls},
       {"checker_failures", r.checker_failures},
       {"line_starts", r.line_starts}};
  j["divergence_step"] = r.divergence_step ? nlohmann::json(*r.divergence_step) : nlohmann::json(nullptr);
}

namespace {

// The line a candidate would open and the checker prefix for it, if the
// candidate's first non-whitespace character lands at a line start.
struct LineTarget {
  std::uint32_t line;
  std::size_t prefix_end;  // bytes of (emitted text + candidate) in the prefix
};

std::optional<LineTarget> target_line(const LineState& state, std::string_view emitted,
                                      std::string_view candidate) {
  std::size_t nl = candidate.rfind('\n');
  if (nl == std::string_view::npos) {
    if (!state.at_line_start) return std::nullopt;
    std::size_t last = emitted.rfind('\n');
    return LineTarget{state.current_line_index, last == std::string_view::npos ? 0 : last + 1};
  }
  std::uint32_t newlines = 0;
  for (char c : candidate) newlines += c == '\n';
  return LineTarget{state.current_line_index + newlines, emitted.size() + nl + 1};
}

}  // namespace

DecodeRecord run_decode(TokenProvider& provider, checker::Checker* checker, const DecodeRequest& request,
                        const InterventionConfig& cfg) {
  validate(cfg);
  if (cfg.mode == Mode::Full && checker == nullptr)
    throw Error(ErrorKind::InvalidArgument, "mode full needs a checker");

  DecodeRecord rec;
  LineState state;
  std::map<std::string, bool> asked;  // checker answers by prefix
  const auto eos = provider.eos_id();

  auto consult = [&](std::string prefix, std::uint32_t line) {
    auto it = asked.find(prefix);
    if (it != asked.end()) return it->second;
    bool yes = false;
    ++rec.checker_calls;
    try {
      yes = checker->predict({prefix, line}).needs_if;
    } catch (const std::exception& e) {
      ++rec.checker_failures;
      log::warn(std::string("CheckerError: ") + e.what() + "; continuing without intervention");
    }
    asked.emplace(std::move(prefix), yes);
    return yes;
  };

  try {
    provider.start(request.prompt);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::ProviderError, std::string("start: ") + e.what());
  }

  for (std::size_t step = 0;; ++step) {
    if (step >= cfg.max_tokens) {
      rec.stop_reason = StopReason::MaxTokens;
      break;
    }
    std::optional<LogitFrame> frame;
    try {
      frame = provider.next_frame({step, rec.text});
    } catch (const std::exception& e) {
      throw Error(ErrorKind::ProviderError, "step " + std::to_string(step) + ": " + e.what());
    }
    if (!frame) {
      rec.stop_reason = StopReason::ProviderExhausted;
      break;
    }
    if (frame->candidates.empty())
      throw Error(ErrorKind::ProviderError, "step " + std::to_string(step) + ": empty frame");
    rec.steps = step + 1;

    LogitFrame chosen_frame = *frame;
    auto rank = if_rank(*frame, cfg.if_token_ids);
    bool gate = rank && *rank <= cfg.top_rank_threshold;
    bool adjust = false;
    std::uint32_t line = state.current_line_index;
    if (gate && cfg.mode == Mode::NoChecker) {
      adjust = true;
      if (auto t = target_line(state, rec.text, frame->candidates[*rank - 1].text)) line = t->line;
    } else if (gate && cfg.mode == Mode::Full) {
      std::string_view cand = frame->candidates[*rank - 1].text;
      if (auto t = target_line(state, rec.text, cand)) {
        std::string body = rec.text;
        body += cand;
        std::string prefix = request.signature;
        if (!prefix.empty() && prefix.back() != '\n') prefix += '\n';
        prefix.append(body, 0, t->prefix_end);
        line = t->line;
        adjust = consult(std::move(prefix), line);
      }
    }
    if (adjust) {
      auto [adjusted, info] = adjust_frame(*frame, cfg.if_token_ids, cfg);
      chosen_frame = std::move(adjusted);
      rec.interventions.push_back({step, line, *info.pre_rank, info.delta_applied, info.changed_choice});
    }

    const TokenEntry chosen = chosen_frame.candidates.front();
    if (request.on_step) request.on_step(*frame, chosen);
    provider.accept(chosen);
    if (eos && chosen.token_id == *eos) {
      rec.stop_reason = StopReason::Eos;
      break;
    }
    rec.emitted.push_back(chosen);
    rec.text += chosen.text;
    std::uint32_t before = state.current_line_index;
    state.advance(chosen.text);
    rec.line_starts += state.current_line_index - before;
  }
  rec.divergence_step = provider.divergence_step();
  return rec;
}

Trace record_trace(TokenProvider& provider, const std::string& prompt, std::size_t max_tokens) {
  Trace trace;
  trace.eos_id = provider.eos_id();
  DecodeRequest req;
  req.prompt = prompt;
  req.on_step = [&](const LogitFrame& f, const TokenEntry& chosen) { trace.steps.push_back({f, chosen.token_id}); };
  InterventionConfig cfg;
  cfg.mode = Mode::Off;
  cfg.max_tokens = max_tokens;
  run_decode(provider, nullptr, req, cfg);
  return trace;
}

}  // namespace robgen::decode
