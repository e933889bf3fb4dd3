#include "robgen/decode/calibrate.hpp"

#include "robgen/error.hpp"
#include "robgen/stats/stats.hpp"

namespace robgen::decode {

void to_json(nlohmann::json& j, const Observation& o) {
  j = {{"logit_top1", o.logit_top1}, {"logit_if", o.logit_if}, {"rank_if", o.rank_if}};
}

void from_json(const nlohmann::json& j, Observation& o) {
  j.at("logit_top1").get_to(o.logit_top1);
  j.at("logit_if").get_to(o.logit_if);
  auto r = j.at("rank_if").get<long long>();
  if (r < 2) throw Error(ErrorKind::InvalidRank, "rank_if must be >= 2, got " + std::to_string(r));
  o.rank_if = static_cast<std::size_t>(r);
}

double normalized_gap(const Observation& o) {
  if (o.rank_if < 2) throw Error(ErrorKind::InvalidRank, "rank_if must be >= 2, got " + std::to_string(o.rank_if));
  if (o.logit_top1 < o.logit_if)
    throw Error(ErrorKind::InvalidObservation, "logit_top1 " + std::to_string(o.logit_top1) +
                                                   " is below logit_if " + std::to_string(o.logit_if));
  return (o.logit_top1 - o.logit_if) / static_cast<double>(o.rank_if - 1);
}

double calibrate_delta(const std::vector<Observation>& observations, double percentile) {
  if (observations.empty()) throw Error(ErrorKind::EmptyObservations, "no observations to calibrate from");
  std::vector<double> gaps;
  gaps.reserve(observations.size());
  for (const auto& o : observations) gaps.push_back(normalized_gap(o));
  return stats::percentile_nearest_rank(std::move(gaps), percentile);
}

std::vector<Observation> observations_from_frames(const std::vector<LogitFrame>& frames,
                                                  const std::set<TokenId>& if_ids) {
  std::vector<Observation> out;
  for (const auto& f : frames) {
    auto r = if_rank(f, if_ids);
    if (!r || *r < 2) continue;
    out.push_back({f.candidates.front().logit, f.candidates[*r - 1].logit, *r});
  }
  return out;
}

double RankHistogram::fraction(std::size_t rank) const {
  auto it = counts.find(rank);
  return it == counts.end() || n == 0 ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
}

double RankHistogram::absent_fraction() const {
  return n == 0 ? 0.0 : static_cast<double>(absent) / static_cast<double>(n);
}

void to_json(nlohmann::json& j, const RankHistogram& h) {
  nlohmann::json ranks = nlohmann::json::object();
  for (const auto& [r, c] : h.counts) ranks[std::to_string(r)] = h.fraction(r);
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [r, c] : h.counts) counts[std::to_string(r)] = c;
  j = {{"n", h.n}, {"max_rank", h.max_rank}, {"fractions", ranks}, {"counts", counts},
       {"absent", h.absent_fraction()}, {"absent_count", h.absent}};
}

RankHistogram rank_histogram(const std::vector<LogitFrame>& frames, const std::set<TokenId>& if_ids,
                             std::size_t max_rank) {
  if (frames.empty()) throw Error(ErrorKind::EmptyInput, "no frames");
  RankHistogram h;
  h.n = frames.size();
  h.max_rank = max_rank;
  for (const auto& f : frames) {
    auto r = if_rank(f, if_ids);
    if (r && *r <= max_rank)
      ++h.counts[*r];
    else
      ++h.absent;
  }
  return h;
}

}  // namespace robgen::decode
