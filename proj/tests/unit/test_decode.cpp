#include "doctest.h"
#include <cstring>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "robgen/checker/checker.hpp"
#include "robgen/decode/calibrate.hpp"
#include "robgen/decode/engine.hpp"
#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/log.hpp"

using namespace robgen;
using namespace robgen::decode;

namespace {

const std::filesystem::path kDir = std::filesystem::path(ROBGEN_FIXTURES) / "toylm";

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

struct QuietLog {
  log::Sink old;
  std::vector<std::string> lines;
  QuietLog() {
    old = log::set_sink([this](log::Level, std::string_view m) { lines.emplace_back(m); });
  }
  ~QuietLog() { log::set_sink(old); }
};

LogitFrame make_frame(std::vector<TokenEntry> c) {
  LogitFrame f{0, std::move(c)};
  sort_frame(f);
  return f;
}

// Plain greedy straight off the model table, sharing no code with the engine.
std::string plain_greedy(const ToyLmModel& m, std::size_t max_tokens) {
  std::vector<std::string> hist{"<s>"};
  std::string out;
  for (std::size_t step = 0; step < max_tokens; ++step) {
    std::string key;
    std::size_t from = hist.size() > m.order ? hist.size() - m.order : 0;
    for (std::size_t i = from; i < hist.size(); ++i) key += (i > from ? "\x1f" : "") + hist[i];
    auto it = m.table.find(key);
    const auto& v = it == m.table.end() ? m.fallback : it->second;
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
      if (v[i] > v[best]) best = i;
    if (m.vocab[best] == m.eos) break;
    out += m.vocab[best];
    hist.push_back(m.vocab[best]);
  }
  return out;
}

// Brute-force reading of the adjustment rule: boost, then a full re-sort.
LogitFrame brute_adjust(const LogitFrame& f, const std::set<TokenId>& ids, double delta, std::size_t thr) {
  LogitFrame out = f;
  for (std::size_t i = 0; i < out.candidates.size(); ++i) {
    if (!ids.count(out.candidates[i].token_id)) continue;
    std::size_t rank = i + 1;
    if (rank <= thr) out.candidates[i].logit = out.candidates[i].logit + delta * static_cast<double>(rank - 1);
    break;
  }
  std::sort(out.candidates.begin(), out.candidates.end(), [](const TokenEntry& a, const TokenEntry& b) {
    return a.logit > b.logit || (a.logit == b.logit && a.token_id < b.token_id);
  });
  return out;
}

LogitFrame random_frame(std::mt19937& rng, std::size_t k, const std::vector<TokenId>& if_pool,
                        double if_prob) {
  std::vector<TokenEntry> c;
  std::set<TokenId> used;
  std::uniform_real_distribution<double> logit(-5.0, 10.0);
  std::bernoulli_distribution coarse(0.3);  // coarse logits create ties
  while (c.size() < k) {
    TokenId id = static_cast<TokenId>(rng() % 200);
    bool is_if = std::find(if_pool.begin(), if_pool.end(), id) != if_pool.end();
    if (is_if && !std::bernoulli_distribution(if_prob)(rng)) continue;
    if (!used.insert(id).second) continue;
    double l = coarse(rng) ? std::round(logit(rng)) : logit(rng);
    c.push_back({id, is_if ? " if" : "t" + std::to_string(id), l});
  }
  return make_frame(std::move(c));
}

struct Scenario {
  nlohmann::json def;
  ToyLmModel model;
};

std::vector<Scenario> load_scenarios() {
  auto j = nlohmann::json::parse(io::read_file(kDir / "scenarios.json"));
  std::vector<Scenario> out;
  for (const auto& s : j.at("scenarios"))
    out.push_back({s, ToyLmModel::load(kDir / s.at("model").get<std::string>())});
  return out;
}

std::unique_ptr<checker::Checker> scenario_checker(const nlohmann::json& s) {
  if (s.value("checker", "oracle") == "heuristic") return std::make_unique<checker::HeuristicChecker>();
  std::map<std::uint32_t, bool> script;
  const nlohmann::json raw = s.value("script", nlohmann::json::object());
  for (const auto& [k, v] : raw.items())
    script[static_cast<std::uint32_t>(std::stoul(k))] = v.get<bool>();
  return std::make_unique<checker::OracleChecker>(script);
}

InterventionConfig scenario_config(const nlohmann::json& s, const ToyLmProvider& p) {
  InterventionConfig cfg;
  cfg.delta = s.value("delta", 1.0);
  cfg.top_rank_threshold = s.value("threshold", std::size_t{3});
  cfg.mode = mode_from_string(s.value("mode", "full"));
  cfg.max_tokens = s.value("max_tokens", std::size_t{1024});
  cfg.if_token_ids = build_if_token_set(p.vocabulary(), s.value("if_extended", false));
  return cfg;
}

DecodeRecord run(const Scenario& sc, InterventionConfig cfg, checker::Checker* chk) {
  ToyLmProvider p(sc.model);
  return run_decode(p, chk, {"", sc.def.at("signature").get<std::string>(), {}}, cfg);
}

}  // namespace

TEST_CASE("if token set") {
  QuietLog quiet;
  CHECK(build_if_token_set({{5, "if"}, {9, " if"}, {12, "iff"}}) == std::set<TokenId>{5, 9});
  CHECK(build_if_token_set({{7, "\n  if"}}) == std::set<TokenId>{7});
  CHECK(build_if_token_set({{1, "if("}, {2, "if ("}, {3, "\tif"}}) == std::set<TokenId>{3});
  CHECK(build_if_token_set({{1, "if("}, {2, "if ("}, {3, "\tif"}}, true) == std::set<TokenId>{1, 2, 3});
  CHECK(build_if_token_set({{1, "for"}}).empty());
  REQUIRE_FALSE(quiet.lines.empty());
  CHECK(quiet.lines.back().find("NoIfToken") != std::string::npos);
  CHECK(kind_of([] { build_if_token_set({}); }) == ErrorKind::EmptyVocabulary);
}

TEST_CASE("if rank") {
  std::set<TokenId> ids{1, 2};
  CHECK(if_rank(make_frame({{10, "byte", 4.0}, {1, "if", 3.1}, {11, "int", 2.0}}), ids) == 2u);
  CHECK_FALSE(if_rank(make_frame({{10, "byte", 4.0}, {11, "int", 2.0}}), ids).has_value());

  // every ordering of five candidates, two of them if forms
  std::vector<TokenEntry> base{{2, " if", 0}, {1, "if", 0}, {10, "a", 0}, {11, "b", 0}, {12, "c", 0}};
  std::vector<int> perm{0, 1, 2, 3, 4};
  do {
    std::vector<TokenEntry> c = base;
    for (std::size_t pos = 0; pos < 5; ++pos) c[static_cast<std::size_t>(perm[pos])].logit = 10.0 - pos;
    LogitFrame f = make_frame(c);
    std::size_t expected = 0;
    for (std::size_t pos = 0; pos < 5 && expected == 0; ++pos)
      if (perm[pos] <= 1) expected = pos + 1;
    CHECK(if_rank(f, ids) == expected);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("adjust_frame examples") {
  std::set<TokenId> ids{7};
  InterventionConfig cfg;
  cfg.delta = 1.29;
  auto f = make_frame({{1, "x", 4.0}, {2, "y", 3.0}, {7, "if", 2.0}});
  auto [adj, info] = adjust_frame(f, ids, cfg);
  CHECK(info.pre_rank == 3u);
  CHECK(info.gated);
  CHECK(info.changed_choice);
  CHECK(adj.candidates[0].token_id == 7);
  CHECK(adj.candidates[0].logit == doctest::Approx(4.58));

  auto top = make_frame({{7, "if", 5.0}, {1, "x", 4.0}});
  auto [same, i1] = adjust_frame(top, ids, cfg);
  CHECK(same == top);
  CHECK(i1.gated);
  CHECK_FALSE(i1.changed_choice);
  CHECK(i1.delta_applied == 0.0);

  auto fourth = make_frame({{1, "a", 5}, {2, "b", 4}, {3, "c", 3}, {7, "if", 2.5}});
  auto [untouched, i4] = adjust_frame(fourth, ids, cfg);
  CHECK(untouched == fourth);
  CHECK_FALSE(i4.gated);

  cfg.delta = -1;
  CHECK(kind_of([&] { adjust_frame(f, ids, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("property: adjust_frame matches brute force, changes one logit, respects the gate") {
  std::mt19937 rng(314159);
  std::vector<TokenId> pool{3, 4, 5};
  std::set<TokenId> ids(pool.begin(), pool.end());
  for (int trial = 0; trial < 1000; ++trial) {
    LogitFrame f = random_frame(rng, 1 + rng() % 30, pool, 0.5);
    InterventionConfig cfg;
    cfg.delta = std::uniform_real_distribution<double>(0, 3)(rng);
    cfg.top_rank_threshold = 1 + rng() % 5;
    auto [adj, info] = adjust_frame(f, ids, cfg);
    LogitFrame expect = brute_adjust(f, ids, cfg.delta, cfg.top_rank_threshold);
    REQUIRE(adj.candidates.size() == expect.candidates.size());
    for (std::size_t i = 0; i < adj.candidates.size(); ++i) {
      CHECK(adj.candidates[i].token_id == expect.candidates[i].token_id);
      CHECK(adj.candidates[i].text == expect.candidates[i].text);
      CHECK(std::memcmp(&adj.candidates[i].logit, &expect.candidates[i].logit, sizeof(double)) == 0);
    }
    CHECK(is_sorted_frame(adj));
    std::size_t changed = 0;
    for (const auto& c : f.candidates) {
      auto it = std::find_if(adj.candidates.begin(), adj.candidates.end(),
                             [&](const TokenEntry& e) { return e.token_id == c.token_id; });
      REQUIRE(it != adj.candidates.end());
      CHECK(it->text == c.text);
      changed += it->logit != c.logit;
    }
    CHECK(changed <= 1);
  }

  for (int trial = 0; trial < 10000; ++trial) {
    LogitFrame f = random_frame(rng, 1 + rng() % 30, pool, 0.3);
    InterventionConfig cfg;
    cfg.delta = std::uniform_real_distribution<double>(0, 5)(rng);
    auto rank = if_rank(f, ids);
    auto [adj, info] = adjust_frame(f, ids, cfg);
    if (!rank || *rank > 3) {
      CHECK(adj == f);
      CHECK_FALSE(info.gated);
    }
  }
}

TEST_CASE("toy-LM scenarios") {
  QuietLog quiet;
  auto scenarios = load_scenarios();
  REQUIRE(scenarios.size() >= 20);
  for (const auto& sc : scenarios) {
    const auto& s = sc.def;
    CAPTURE(s.at("name").get<std::string>());
    ToyLmProvider probe(sc.model);
    InterventionConfig cfg = scenario_config(s, probe);
    auto chk = scenario_checker(s);

    DecodeRecord rec = run(sc, cfg, chk.get());
    CHECK(rec.text == s.at("text").get<std::string>());
    CHECK(to_string(rec.stop_reason) == s.at("stop").get<std::string>());
    const auto& want = s.at("interventions");
    REQUIRE(rec.interventions.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(rec.interventions[i].step == want[i].at("step").get<std::size_t>());
      CHECK(rec.interventions[i].line == want[i].at("line").get<std::uint32_t>());
      CHECK(rec.interventions[i].pre_rank == want[i].at("pre_rank").get<std::size_t>());
      CHECK(rec.interventions[i].changed_choice == want[i].at("changed").get<bool>());
      if (rec.interventions[i].changed_choice) {
        CHECK(rec.interventions[i].pre_rank >= 2);
        CHECK(rec.interventions[i].pre_rank <= cfg.top_rank_threshold);
      }
    }
    if (s.contains("checker_calls")) CHECK(rec.checker_calls == s.at("checker_calls").get<std::size_t>());
    if (s.contains("line_starts")) CHECK(rec.line_starts == s.at("line_starts").get<std::size_t>());
    CHECK(rec.line_starts == 1 + static_cast<std::size_t>(std::count(rec.text.begin(), rec.text.end(), '\n')));

    // greedy equivalence: off, and delta 0 in every mode
    const std::string greedy = plain_greedy(sc.model, cfg.max_tokens);
    CHECK(greedy == s.at("off_text").get<std::string>());
    InterventionConfig off = cfg;
    off.mode = Mode::Off;
    DecodeRecord off_rec = run(sc, off, nullptr);
    CHECK(off_rec.text == greedy);
    CHECK(off_rec.interventions.empty());
    for (Mode m : {Mode::Full, Mode::NoChecker}) {
      InterventionConfig zero = cfg;
      zero.delta = 0.0;
      zero.mode = m;
      checker::OracleChecker always({{1, true}, {2, true}, {3, true}, {4, true}, {5, true}, {6, true}});
      CHECK(run(sc, zero, &always).text == greedy);
    }
  }
}

TEST_CASE("guard-needed end to end") {
  auto scenarios = load_scenarios();
  auto it = std::find_if(scenarios.begin(), scenarios.end(),
                         [](const Scenario& s) { return s.def.at("name") == "guard-needed"; });
  REQUIRE(it != scenarios.end());
  ToyLmProvider probe(it->model);
  InterventionConfig cfg = scenario_config(it->def, probe);

  auto line2 = [](const std::string& text) {
    std::size_t a = text.find('\n');
    std::size_t b = text.find('\n', a + 1);
    std::string l = text.substr(a + 1, b - a - 1);
    return l.substr(l.find_first_not_of(" \t"));
  };
  checker::OracleChecker yes({{2, true}});
  checker::OracleChecker no;
  CHECK(line2(run(*it, cfg, &yes).text).rfind("if", 0) == 0);
  CHECK(line2(run(*it, cfg, &no).text).rfind("if", 0) != 0);
  cfg.mode = Mode::Off;
  CHECK(line2(run(*it, cfg, nullptr).text).rfind("n", 0) == 0);
}

TEST_CASE("checker failure degrades to no intervention") {
  struct Broken : checker::Checker {
    int calls = 0;
    checker::Decision predict(const checker::Query&) override {
      ++calls;
      throw Error(ErrorKind::CheckerError, "model server down");
    }
  };
  QuietLog quiet;
  auto scenarios = load_scenarios();
  const Scenario& sc = scenarios.front();
  ToyLmProvider probe(sc.model);
  InterventionConfig cfg = scenario_config(sc.def, probe);
  Broken broken;
  DecodeRecord rec = run(sc, cfg, &broken);
  CHECK(rec.text == sc.def.at("off_text").get<std::string>());
  CHECK(rec.checker_failures == static_cast<std::size_t>(broken.calls));
  CHECK(broken.calls >= 1);
  CHECK(std::any_of(quiet.lines.begin(), quiet.lines.end(),
                    [](const std::string& l) { return l.find("CheckerError") != std::string::npos; }));
}

TEST_CASE("checker sees signature plus generated lines") {
  struct Spy : checker::Checker {
    std::vector<checker::Query> seen;
    checker::Decision predict(const checker::Query& q) override {
      seen.push_back(q);
      return {true, 1.0, checker::Source::Oracle};
    }
  };
  auto scenarios = load_scenarios();
  for (const char* name : {"guard-needed", "newline-spanning-if", "indent-then-if"}) {
    CAPTURE(name);
    auto it = std::find_if(scenarios.begin(), scenarios.end(),
                           [&](const Scenario& s) { return s.def.at("name") == name; });
    REQUIRE(it != scenarios.end());
    ToyLmProvider probe(it->model);
    Spy spy;
    run(*it, scenario_config(it->def, probe), &spy);
    REQUIRE_FALSE(spy.seen.empty());
    CHECK(spy.seen.front().prefix == "int len(String s) {\n    int n = 0;\n");
    CHECK(spy.seen.front().line_index == 2);
  }
}

TEST_CASE("provider errors carry the step") {
  struct Failing : TokenProvider {
    std::optional<LogitFrame> next_frame(const DecodeContext& ctx) override {
      if (ctx.step == 2) throw std::runtime_error("socket closed");
      return LogitFrame{ctx.step, {{1, "x", 1.0}}};
    }
    std::optional<TokenId> eos_id() const override { return 0; }
    Vocabulary vocabulary() const override { return {{0, "<eos>"}, {1, "x"}}; }
  };
  Failing p;
  InterventionConfig cfg;
  cfg.mode = Mode::Off;
  try {
    run_decode(p, nullptr, {}, cfg);
    FAIL("expected ProviderError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ProviderError);
    CHECK(std::string(e.what()).find("step 2") != std::string::npos);
  }
  cfg.mode = Mode::Full;
  CHECK(kind_of([&] { run_decode(p, nullptr, {}, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("trace replay") {
  auto scenarios = load_scenarios();
  const Scenario& sc = scenarios.front();  // guard-needed
  ToyLmProvider recorder(sc.model);
  Trace trace = record_trace(recorder, "", 1024);
  CHECK(trace.eos_id == 0);

  auto path = std::filesystem::temp_directory_path() / "robgen_trace_test.jsonl";
  io::write_jsonl(path, trace.to_rows());
  Trace loaded = Trace::load(path);
  std::filesystem::remove(path);
  REQUIRE(loaded.steps.size() == trace.steps.size());

  InterventionConfig cfg;
  cfg.mode = Mode::Off;
  TraceReplayProvider replay(loaded);
  DecodeRecord off = run_decode(replay, nullptr, {"", "int len(String s) {", {}}, cfg);
  CHECK(off.text == sc.def.at("off_text").get<std::string>());
  CHECK(off.stop_reason == StopReason::Eos);
  CHECK_FALSE(off.divergence_step.has_value());

  // the intervention leaves the recorded path at step 2
  cfg.mode = Mode::Full;
  cfg.if_token_ids = build_if_token_set(replay.vocabulary());
  checker::OracleChecker yes({{2, true}});
  TraceReplayProvider replay2(loaded);
  DecodeRecord full = run_decode(replay2, &yes, {"", "int len(String s) {", {}}, cfg);
  CHECK(full.stop_reason == StopReason::ProviderExhausted);
  CHECK(full.divergence_step == 2u);
  CHECK(full.text == "    int n = 0;\n    if");

  // a truncated trace simply runs out
  Trace shorter = loaded;
  shorter.steps.resize(3);
  TraceReplayProvider replay3(shorter);
  cfg.mode = Mode::Off;
  DecodeRecord cut = run_decode(replay3, nullptr, {}, cfg);
  CHECK(cut.stop_reason == StopReason::ProviderExhausted);
  CHECK_FALSE(cut.divergence_step.has_value());
  CHECK(cut.steps == 3);
}

TEST_CASE("trace parsing") {
  std::vector<nlohmann::json> rows{
      nlohmann::json::parse(R"({"meta":{"eos_id":0,"model":"m"}})"),
      nlohmann::json::parse(R"({"step":0,"topk":[{"id":3,"text":"b","logit":1.0},{"id":2,"text":"a","logit":2.0}],"chosen_id":2})")};
  Trace t = Trace::from_rows(rows);
  CHECK(t.model == "m");
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].frame.candidates.front().token_id == 2);

  rows[1]["step"] = 4;
  CHECK(kind_of([&] { Trace::from_rows(rows); }) == ErrorKind::Format);
  rows[1] = nlohmann::json::parse(R"({"step":0,"topk":[{"id":3,"text":"b","logit":1.0},{"id":3,"text":"a","logit":2.0}],"chosen_id":3})");
  CHECK(kind_of([&] { Trace::from_rows(rows); }) == ErrorKind::Format);
  CHECK(kind_of([] { Trace::from_rows({nlohmann::json::parse(R"({"step":0,"topk":[],"chosen_id":1})")}); }) ==
        ErrorKind::Format);
}

TEST_CASE("toy model validation") {
  auto good = nlohmann::json::parse(R"({"vocab":["<eos>","a"],"eos":"<eos>","order":1,"table":{},"default":[1,0]})");
  CHECK_NOTHROW(ToyLmModel::from_json(good));
  auto bad = good;
  bad["default"] = {1};
  CHECK(kind_of([&] { ToyLmModel::from_json(bad); }) == ErrorKind::Format);
  bad = good;
  bad["eos"] = "</s>";
  CHECK(kind_of([&] { ToyLmModel::from_json(bad); }) == ErrorKind::Format);
  bad = good;
  bad["vocab"] = nlohmann::json::array();
  CHECK(kind_of([&] { ToyLmModel::from_json(bad); }) == ErrorKind::EmptyVocabulary);
  CHECK(toy_key({"<s>", "a", "b"}, 2) == "a\x1f" "b");
  CHECK(toy_key({"<s>"}, 3) == "<s>");
}

TEST_CASE("line state") {
  LineState s;
  CHECK(s.at_line_start);
  CHECK_FALSE(s.advance("    "));
  CHECK(s.at_line_start);
  CHECK(s.advance("if"));
  CHECK_FALSE(s.at_line_start);
  CHECK(s.seen_non_ws_on_line);
  CHECK(s.advance("\n\n  x"));
  CHECK(s.current_line_index == 3);
  CHECK_FALSE(s.advance(";\n"));
  CHECK(s.at_line_start);
  CHECK_FALSE(s.seen_non_ws_on_line);
}

TEST_CASE("delta calibration") {
  std::vector<Observation> ten;
  for (int i = 1; i <= 10; ++i) ten.push_back({0.5 * i, 0.0, 2});
  CHECK(calibrate_delta(ten) == 4.5);
  CHECK(calibrate_delta({{4.0, 2.0, 3}}) == 1.0);
  CHECK(kDefaultDelta == 1.0);
  CHECK(kind_of([] { calibrate_delta({}); }) == ErrorKind::EmptyObservations);
  CHECK(kind_of([] { calibrate_delta({{4.0, 2.0, 1}}); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([] { calibrate_delta({{1.0, 2.0, 2}}); }) == ErrorKind::InvalidObservation);
  CHECK(kind_of([] { nlohmann::json::parse(R"({"logit_top1":1,"logit_if":0,"rank_if":1})").get<Observation>(); }) ==
        ErrorKind::InvalidRank);

  std::mt19937 rng(2718);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t n = 1 + rng() % 100;
    std::vector<Observation> obs;
    std::vector<double> gaps;
    for (std::size_t i = 0; i < n; ++i) {
      double top = std::uniform_real_distribution<double>(0, 20)(rng);
      double lif = top - std::uniform_real_distribution<double>(0, 8)(rng);
      std::size_t rank = 2 + rng() % 29;
      obs.push_back({top, lif, rank});
      gaps.push_back((top - lif) / static_cast<double>(rank - 1));
    }
    std::sort(gaps.begin(), gaps.end());
    double want = gaps[(9 * n + 9) / 10 - 1];  // integer ceil(0.9 n)
    double got = calibrate_delta(obs);
    CHECK(got == want);
    std::size_t covered = static_cast<std::size_t>(std::count_if(gaps.begin(), gaps.end(), [&](double d) { return d <= got; }));
    CHECK(static_cast<double>(covered) >= 0.9 * static_cast<double>(n));
  }
}

TEST_CASE("observations from frames") {
  std::set<TokenId> ids{9};
  std::vector<LogitFrame> frames{make_frame({{1, "a", 4}, {9, "if", 2}, {2, "b", 3}}),
                                 make_frame({{9, "if", 4}, {1, "a", 2}}), make_frame({{1, "a", 4}})};
  auto obs = observations_from_frames(frames, ids);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].rank_if == 3);
  CHECK(obs[0].logit_top1 == 4);
  CHECK(obs[0].logit_if == 2);
}

TEST_CASE("rank histogram") {
  std::set<TokenId> ids{9};
  auto at = [](std::size_t rank) {
    std::vector<TokenEntry> c;
    for (std::size_t i = 1; i <= 40; ++i) c.push_back({i == rank ? 9 : static_cast<TokenId>(100 + i), "t", 100.0 - i});
    return make_frame(c);
  };
  auto h = rank_histogram({at(2), at(2), at(3)}, ids);
  CHECK(h.fraction(2) == doctest::Approx(2.0 / 3.0));
  CHECK(h.fraction(3) == doctest::Approx(1.0 / 3.0));
  CHECK(h.absent_fraction() == 0.0);

  auto none = rank_histogram({at(0), at(35)}, ids);
  CHECK(none.absent_fraction() == 1.0);
  CHECK(none.counts.empty());
  CHECK(kind_of([&] { rank_histogram({}, ids); }) == ErrorKind::EmptyInput);

  std::mt19937 rng(1);
  std::vector<LogitFrame> frames;
  for (int i = 0; i < 200; ++i) frames.push_back(at(rng() % 45));
  auto r = rank_histogram(frames, ids);
  double sum = r.absent_fraction();
  for (const auto& [rank, c] : r.counts) sum += r.fraction(rank);
  CHECK(std::abs(sum - 1.0) < 1e-9);
}
