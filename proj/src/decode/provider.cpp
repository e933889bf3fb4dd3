#include "robgen/decode/provider.hpp"

#include <algorithm>
#include <cmath>

#include "robgen/error.hpp"
#include "robgen/io.hpp"

namespace robgen::decode {

std::string toy_key(const std::vector<std::string>& history, std::size_t order) {
  std::size_t from = history.size() > order ? history.size() - order : 0;
  std::string key;
  for (std::size_t i = from; i < history.size(); ++i) {
    if (i > from) key += kKeySep;
    key += history[i];
  }
  return key;
}

ToyLmModel ToyLmModel::from_json(const nlohmann::json& j) {
  ToyLmModel m;
  try {
    j.at("vocab").get_to(m.vocab);
    j.at("eos").get_to(m.eos);
    m.order = j.value("order", std::size_t{1});
    if (auto t = j.find("table"); t != j.end()) t->get_to(m.table);
    j.at("default").get_to(m.fallback);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("toy model: ") + e.what());
  }
  if (m.vocab.empty()) throw Error(ErrorKind::EmptyVocabulary, "toy model has no vocabulary");
  if (std::find(m.vocab.begin(), m.vocab.end(), m.eos) == m.vocab.end())
    throw Error(ErrorKind::Format, "toy model eos '" + m.eos + "' is not in the vocabulary");
  if (m.order < 1) throw Error(ErrorKind::Format, "toy model order must be >= 1");
  auto check = [&](const std::string& what, const std::vector<double>& v) {
    if (v.size() != m.vocab.size())
      throw Error(ErrorKind::Format, "toy model " + what + " has " + std::to_string(v.size()) +
                                         " logits for " + std::to_string(m.vocab.size()) + " tokens");
    for (double x : v)
      if (std::isnan(x)) throw Error(ErrorKind::Format, "toy model " + what + " has a NaN logit");
  };
  check("default", m.fallback);
  for (const auto& [k, v] : m.table) check("entry '" + k + "'", v);
  return m;
}

ToyLmModel ToyLmModel::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(io::read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

nlohmann::json ToyLmModel::to_json() const {
  return {{"vocab", vocab}, {"eos", eos}, {"order", order}, {"table", table}, {"default", fallback}};
}

ToyLmProvider::ToyLmProvider(ToyLmModel model, std::size_t top_k)
    : model_(std::move(model)), top_k_(std::max<std::size_t>(top_k, 1)) {
  auto it = std::find(model_.vocab.begin(), model_.vocab.end(), model_.eos);
  if (it == model_.vocab.end()) throw Error(ErrorKind::Format, "eos is not in the vocabulary");
  eos_ = static_cast<TokenId>(it - model_.vocab.begin());
  history_.emplace_back(kBos);
}

void ToyLmProvider::start(const std::string&) {
  history_.assign(1, std::string(kBos));
}

std::optional<LogitFrame> ToyLmProvider::next_frame(const DecodeContext& ctx) {
  auto it = model_.table.find(toy_key(history_, model_.order));
  const auto& logits = it != model_.table.end() ? it->second : model_.fallback;
  LogitFrame f;
  f.step = ctx.step;
  f.candidates.reserve(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    f.candidates.push_back({static_cast<TokenId>(i), model_.vocab[i], logits[i]});
  sort_frame(f);
  if (f.candidates.size() > top_k_) f.candidates.resize(top_k_);
  return f;
}

void ToyLmProvider::accept(const TokenEntry& chosen) {
  history_.push_back(chosen.text);
}

Vocabulary ToyLmProvider::vocabulary() const {
  Vocabulary v;
  for (std::size_t i = 0; i < model_.vocab.size(); ++i) v.emplace_back(static_cast<TokenId>(i), model_.vocab[i]);
  return v;
}

Trace Trace::from_rows(const std::vector<nlohmann::json>& rows) {
  Trace t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    try {
      if (row.contains("meta")) {
        if (i != 0) throw Error(ErrorKind::Format, "meta record must come first");
        const auto& meta = row.at("meta");
        if (meta.contains("eos_id")) t.eos_id = meta.at("eos_id").get<TokenId>();
        t.model = meta.value("model", "");
        continue;
      }
      TraceStep s;
      s.frame = row.get<LogitFrame>();
      row.at("chosen_id").get_to(s.chosen_id);
      if (s.frame.step != t.steps.size())
        throw Error(ErrorKind::Format, "expected step " + std::to_string(t.steps.size()) + ", got " +
                                           std::to_string(s.frame.step));
      t.steps.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, "trace record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return t;
}

Trace Trace::load(const std::filesystem::path& path) {
  try {
    return from_rows(io::read_jsonl(path));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Format) throw;
    std::string msg = e.what();
    if (msg.find(path.string()) != std::string::npos) throw;
    throw Error(ErrorKind::Format, path.string() + ": " + msg);
  }
}

std::vector<nlohmann::json> Trace::to_rows() const {
  std::vector<nlohmann::json> rows;
  if (eos_id || !model.empty()) {
    nlohmann::json meta = nlohmann::json::object();
    if (eos_id) meta["eos_id"] = *eos_id;
    if (!model.empty()) meta["model"] = model;
    rows.push_back({{"meta", meta}});
  }
  for (const auto& s : steps) {
    nlohmann::json j = s.frame;
    j["chosen_id"] = s.chosen_id;
    rows.push_back(std::move(j));
  }
  return rows;
}

TraceReplayProvider::TraceReplayProvider(Trace trace) : trace_(std::move(trace)) {}

void TraceReplayProvider::start(const std::string&) {
  cursor_ = 0;
  divergence_.reset();
}

std::optional<LogitFrame> TraceReplayProvider::next_frame(const DecodeContext&) {
  if (divergence_ || cursor_ >= trace_.steps.size()) return std::nullopt;
  return trace_.steps[cursor_].frame;
}

void TraceReplayProvider::accept(const TokenEntry& chosen) {
  if (cursor_ >= trace_.steps.size()) return;
  if (chosen.token_id != trace_.steps[cursor_].chosen_id) divergence_ = cursor_;
  ++cursor_;
}

Vocabulary TraceReplayProvider::vocabulary() const {
  std::map<TokenId, std::string> seen;
  for (const auto& s : trace_.steps)
    for (const auto& c : s.frame.candidates) seen.emplace(c.token_id, c.text);
  return {seen.begin(), seen.end()};
}

}  // namespace robgen::decode
