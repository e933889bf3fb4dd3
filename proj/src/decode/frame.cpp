#include "robgen/decode/frame.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "robgen/error.hpp"
#include "robgen/log.hpp"

namespace robgen::decode {

bool ranks_before(const TokenEntry& a, const TokenEntry& b) {
  if (a.logit != b.logit) return a.logit > b.logit;
  return a.token_id < b.token_id;
}

void sort_frame(LogitFrame& frame) {
  std::stable_sort(frame.candidates.begin(), frame.candidates.end(), ranks_before);
}

bool is_sorted_frame(const LogitFrame& frame) {
  return std::is_sorted(frame.candidates.begin(), frame.candidates.end(), ranks_before);
}

std::set<TokenId> build_if_token_set(const Vocabulary& vocabulary, bool extended) {
  if (vocabulary.empty()) throw Error(ErrorKind::EmptyVocabulary, "vocabulary is empty");
  std::set<TokenId> out;
  for (const auto& [id, text] : vocabulary) {
    std::string_view s = text;
    std::size_t i = s.find_first_not_of(" \t\r\n");
    if (i == std::string_view::npos) continue;
    s.remove_prefix(i);
    if (s == "if" || (extended && (s == "if(" || s == "if ("))) out.insert(id);
  }
  if (out.empty())
    log::warn("NoIfToken: vocabulary has no single-token \"if\" form; intervention disabled");
  return out;
}

std::optional<std::size_t> if_rank(const LogitFrame& frame, const std::set<TokenId>& if_ids) {
  for (std::size_t i = 0; i < frame.candidates.size(); ++i)
    if (if_ids.count(frame.candidates[i].token_id)) return i + 1;
  return std::nullopt;
}

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Off: return "off";
    case Mode::Full: return "full";
    case Mode::NoChecker: return "no_checker";
  }
  return "off";
}

Mode mode_from_string(std::string_view s) {
  if (s == "off") return Mode::Off;
  if (s == "full") return Mode::Full;
  if (s == "no_checker" || s == "no-checker") return Mode::NoChecker;
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + std::string(s) + "'");
}

void validate(const InterventionConfig& cfg) {
  if (!(cfg.delta >= 0.0) || std::isinf(cfg.delta))
    throw Error(ErrorKind::InvalidArgument, "delta must be a finite value >= 0");
  if (cfg.top_rank_threshold < 1) throw Error(ErrorKind::InvalidArgument, "threshold must be >= 1");
  if (cfg.max_tokens < 1) throw Error(ErrorKind::InvalidArgument, "max_tokens must be >= 1");
}

std::pair<LogitFrame, InterventionInfo> adjust_frame(const LogitFrame& frame,
                                                     const std::set<TokenId>& if_ids,
                                                     const InterventionConfig& cfg) {
  if (!(cfg.delta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be >= 0");
  InterventionInfo info;
  LogitFrame out = frame;
  if (!out.candidates.empty()) info.before = info.after = out.candidates.front().token_id;
  info.pre_rank = if_rank(frame, if_ids);
  if (!info.pre_rank || *info.pre_rank > cfg.top_rank_threshold) return {std::move(out), info};

  const std::size_t r = *info.pre_rank;
  info.gated = true;
  info.delta_applied = cfg.delta * static_cast<double>(r - 1);
  out.candidates[r - 1].logit += info.delta_applied;
  // only the boosted entry moves; everything it passes shifts down by one
  std::size_t i = r - 1;
  while (i > 0 && ranks_before(out.candidates[i], out.candidates[i - 1])) {
    std::swap(out.candidates[i], out.candidates[i - 1]);
    --i;
  }
  info.after = out.candidates.front().token_id;
  info.changed_choice = info.after != info.before;
  return {std::move(out), info};
}

void to_json(nlohmann::json& j, const TokenEntry& t) {
  j = {{"id", t.token_id}, {"text", t.text}, {"logit", t.logit}};
}

void from_json(const nlohmann::json& j, TokenEntry& t) {
  j.at("id").get_to(t.token_id);
  j.at("text").get_to(t.text);
  j.at("logit").get_to(t.logit);
  if (t.token_id < 0) throw Error(ErrorKind::Format, "negative token id");
}

void to_json(nlohmann::json& j, const LogitFrame& f) {
  j = {{"step", f.step}, {"topk", f.candidates}};
}

void from_json(const nlohmann::json& j, LogitFrame& f) {
  f.step = j.value("step", std::size_t{0});
  f.candidates = j.at("topk").get<std::vector<TokenEntry>>();
  if (f.candidates.empty()) throw Error(ErrorKind::Format, "frame has no candidates");
  std::unordered_set<TokenId> seen;
  for (const auto& c : f.candidates)
    if (!seen.insert(c.token_id).second)
      throw Error(ErrorKind::Format, "duplicate token id " + std::to_string(c.token_id) + " in frame");
  sort_frame(f);
}

}  // namespace robgen::decode
