#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "json.hpp"
#include "robgen/decode/frame.hpp"

namespace robgen::decode {

struct Observation {
  double logit_top1 = 0.0;
  double logit_if = 0.0;
  std::size_t rank_if = 2;
};

void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);

// (logit_top1 - logit_if) / (rank_if - 1). Throws InvalidRank for rank < 2
// and InvalidObservation when the if logit exceeds the top logit.
double normalized_gap(const Observation& o);

// Nearest-rank 90th percentile of the normalized gaps. Throws
// EmptyObservations.
double calibrate_delta(const std::vector<Observation>& observations, double percentile = 0.9);

// Observations from frames where an if token is present below rank 1.
std::vector<Observation> observations_from_frames(const std::vector<LogitFrame>& frames,
                                                  const std::set<TokenId>& if_ids);

inline constexpr double kDefaultDelta = 1.0;

struct RankHistogram {
  std::size_t n = 0;
  std::size_t max_rank = 30;
  std::map<std::size_t, std::size_t> counts;  // rank -> frames
  std::size_t absent = 0;                     // no if token within max_rank

  double fraction(std::size_t rank) const;
  double absent_fraction() const;
};

void to_json(nlohmann::json& j, const RankHistogram& h);

// Throws EmptyInput.
RankHistogram rank_histogram(const std::vector<LogitFrame>& frames, const std::set<TokenId>& if_ids,
                             std::size_t max_rank = 30);

}  // namespace robgen::decode
