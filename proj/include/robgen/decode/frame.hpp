#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace robgen::decode {

using TokenId = std::int64_t;

struct TokenEntry {
  TokenId token_id = 0;
  std::string text;
  double logit = 0.0;

  bool operator==(const TokenEntry&) const = default;
};

// One decoding step's top-k candidates, logit descending, ties by
// ascending token id.
struct LogitFrame {
  std::size_t step = 0;
  std::vector<TokenEntry> candidates;

  std::size_t k() const { return candidates.size(); }
  bool operator==(const LogitFrame&) const = default;
};

bool ranks_before(const TokenEntry& a, const TokenEntry& b);
void sort_frame(LogitFrame& frame);
bool is_sorted_frame(const LogitFrame& frame);

using Vocabulary = std::vector<std::pair<TokenId, std::string>>;

// Tokens whose text is exactly "if" after leading whitespace; with
// `extended`, also "if(" and "if (". Throws EmptyVocabulary. A vocabulary
// without any if form logs a warning and yields an empty set, which turns
// every intervention into a no-op.
std::set<TokenId> build_if_token_set(const Vocabulary& vocabulary, bool extended = false);

// 1-based rank of the best-ranked if candidate.
std::optional<std::size_t> if_rank(const LogitFrame& frame, const std::set<TokenId>& if_ids);

enum class Mode { Off, Full, NoChecker };

std::string_view to_string(Mode m) noexcept;
Mode mode_from_string(std::string_view s);

struct InterventionConfig {
  double delta = 1.0;
  std::size_t top_rank_threshold = 3;
  Mode mode = Mode::Full;
  std::size_t max_tokens = 1024;
  std::set<TokenId> if_token_ids;
};

// Throws InvalidArgument for a negative delta or zero threshold/max_tokens.
void validate(const InterventionConfig& cfg);

struct InterventionInfo {
  std::optional<std::size_t> pre_rank;
  bool gated = false;  // 1 <= pre_rank <= threshold, adjustment applied
  double delta_applied = 0.0;  // delta * (rank - 1)
  bool changed_choice = false;
  TokenId before = 0;  // argmax ids before and after
  TokenId after = 0;
};

// logit += delta * (rank - 1) for the best if candidate when its rank is
// within the threshold, then re-sort. Other entries are untouched.
std::pair<LogitFrame, InterventionInfo> adjust_frame(const LogitFrame& frame,
                                                     const std::set<TokenId>& if_ids,
                                                     const InterventionConfig& cfg);

void to_json(nlohmann::json& j, const TokenEntry& t);
void from_json(const nlohmann::json& j, TokenEntry& t);
void to_json(nlohmann::json& j, const LogitFrame& f);
// Accepts {"step", "topk"} (the trace shape) and re-sorts candidates.
void from_json(const nlohmann::json& j, LogitFrame& f);

}  // namespace robgen::decode
