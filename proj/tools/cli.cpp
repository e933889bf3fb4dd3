#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "robgen/bench/bench.hpp"
#include "robgen/checker/checker.hpp"
#include "robgen/checker/dataset.hpp"
#include "robgen/decode/calibrate.hpp"
#include "robgen/decode/engine.hpp"
#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/judge/judge.hpp"
#include "robgen/log.hpp"
#include "robgen/metrics/corpus.hpp"
#include "robgen/patterns/patterns.hpp"
#include "robgen/stats/stats.hpp"

namespace robgen::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Global {
  bool json = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string profile = "eval";
  bool verbose = false;
};

struct ProviderOpts {
  std::string kind = "toy";
  std::string model;
  std::string trace;
  std::size_t top_k = 30;
};

struct CheckerOpts {
  std::string kind = "heuristic";
  std::string oracle_lines;
  std::string url;
  int timeout_ms = 2000;
  bool guard_index = false;
};

struct DecodeOpts {
  std::string mode = "full";
  double delta = decode::kDefaultDelta;
  std::size_t threshold = 3;
  std::size_t max_tokens = 0;  // 0: from the profile
  bool extended_if = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void add_provider_flags(CLI::App* app, ProviderOpts& p) {
  app->add_option("--provider", p.kind, "Token source")->check(CLI::IsMember({"toy", "trace"}));
  app->add_option("--model", p.model, "Toy LM JSON");
  app->add_option("--trace", p.trace, "Logit trace JSONL");
  app->add_option("--top-k", p.top_k, "Candidates per toy LM frame");
}

void add_checker_flags(CLI::App* app, CheckerOpts& c) {
  app->add_option("--checker", c.kind, "Line-level checker")
      ->check(CLI::IsMember({"heuristic", "oracle", "remote"}));
  app->add_option("--oracle-lines", c.oracle_lines, "Comma-separated line indices the oracle answers yes to");
  app->add_option("--checker-url", c.url, "Remote checker endpoint");
  app->add_option("--checker-timeout-ms", c.timeout_ms, "Remote checker timeout");
  app->add_flag("--guard-index-params", c.guard_index, "Heuristic: also guard index-like int parameters");
}

void add_decode_flags(CLI::App* app, DecodeOpts& d) {
  app->add_option("--mode", d.mode, "off, full or no-checker")
      ->check(CLI::IsMember({"off", "full", "no-checker", "no_checker"}));
  app->add_option("--delta", d.delta, "Logit boost per rank")->check(CLI::NonNegativeNumber);
  app->add_option("--threshold", d.threshold, "Highest if rank that gets boosted")->check(CLI::PositiveNumber);
  app->add_option("--max-tokens", d.max_tokens, "Token limit (default from --profile)");
  app->add_flag("--extended-if", d.extended_if, "Also treat 'if(' and 'if (' tokens as if");
}

std::unique_ptr<decode::TokenProvider> make_provider(const ProviderOpts& p, const std::string& trace_path = "") {
  if (p.kind == "toy") {
    if (p.model.empty()) throw CLI::RequiredError("--model (with --provider toy)");
    return std::make_unique<decode::ToyLmProvider>(decode::ToyLmModel::load(p.model), p.top_k);
  }
  std::string path = trace_path.empty() ? p.trace : trace_path;
  if (path.empty()) throw CLI::RequiredError("--trace (with --provider trace)");
  return std::make_unique<decode::TraceReplayProvider>(decode::Trace::load(path));
}

std::unique_ptr<checker::Checker> make_checker(const CheckerOpts& c) {
  if (c.kind == "oracle") {
    std::map<std::uint32_t, bool> script;
    for (const auto& s : split_list(c.oracle_lines)) script[static_cast<std::uint32_t>(std::stoul(s))] = true;
    return std::make_unique<checker::OracleChecker>(std::move(script));
  }
  if (c.kind == "remote") {
    if (c.url.empty()) throw CLI::RequiredError("--checker-url (with --checker remote)");
    return std::make_unique<checker::RemoteChecker>(checker::RemoteOptions{c.url, c.timeout_ms});
  }
  return std::make_unique<checker::HeuristicChecker>(checker::HeuristicOptions{c.guard_index});
}

// if ids come from the provider; without one they are filled per run.
decode::InterventionConfig make_config(const DecodeOpts& d, const Global& g, const decode::TokenProvider* provider) {
  decode::InterventionConfig cfg;
  cfg.delta = d.delta;
  cfg.top_rank_threshold = d.threshold;
  cfg.mode = decode::mode_from_string(d.mode == "no-checker" ? "no_checker" : d.mode);
  cfg.max_tokens = d.max_tokens ? d.max_tokens : bench::default_max_tokens(bench::profile_from_string(g.profile));
  if (provider) cfg.if_token_ids = decode::build_if_token_set(provider->vocabulary(), d.extended_if);
  decode::validate(cfg);
  return cfg;
}

std::string read_text_arg(const std::string& value) {
  if (!value.empty() && value[0] == '@') return io::read_file(value.substr(1));
  return value;
}

// --- metrics

int cmd_metrics(const Global& g, const std::string& path, bool strict_catch, bool csv, std::ostream& out) {
  auto snippets = metrics::load_corpus(path);
  metrics::CorpusOptions opts;
  opts.exception_handling.strict_catch = strict_catch;
  opts.jobs = g.jobs;
  auto m = metrics::corpus_metrics(snippets, opts);
  if (g.json) {
    out << json(m).dump(2) << "\n";
  } else if (csv) {
    out << metrics::to_csv(m);
  } else {
    out << "snippets: " << m.n_snippets << "\n";
    out << "AvgABE:   " << fmt("%.4f", m.avg_abe) << "\n";
    out << "EHAR:     " << fmt("%.4f", m.ehar) << "\n";
    for (const auto& e : m.excluded) out << "excluded: " << e.id << " (" << e.reason << ")\n";
    if (m.skipped_conditions) out << "skipped conditions: " << m.skipped_conditions << "\n";
  }
  return 0;
}

// --- patterns

int cmd_patterns(const Global& g, const std::string& pairs_path, const std::string& gen_path,
                 const std::string& ref_path, const std::string& scope, bool strict, std::ostream& out) {
  std::vector<patterns::PatternPair> pairs;
  if (!pairs_path.empty()) {
    pairs = patterns::load_pairs(pairs_path);
  } else {
    if (gen_path.empty() || ref_path.empty()) throw CLI::ValidationError("patterns", "give --pairs or both --generated and --reference");
    patterns::PatternPair p;
    p.id = fs::path(gen_path).stem().string();
    p.generated = io::read_file(gen_path);
    p.reference = io::read_file(ref_path);
    for (const auto& s : split_list(scope)) p.scope_symbols.insert(s);
    pairs.push_back(std::move(p));
  }
  std::vector<patterns::IssueReport> reports;
  for (const auto& p : pairs) {
    reports.push_back(patterns::diff_findings({p.id, p.generated, Origin::Generated, "java"},
                                              {p.id, p.reference, Origin::Reference, "java"}, p.scope_symbols,
                                              {strict}));
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& r : reports)
    for (const auto& f : r.findings) ++counts[std::string(patterns::to_string(f.pattern))];
  auto dist = patterns::line_distribution(reports);
  if (g.json) {
    json lines = json::object();
    for (const auto& [l, f] : dist) lines[std::to_string(l)] = f;
    out << json{{"reports", reports}, {"pattern_counts", counts}, {"first_line_distribution", lines}}.dump(2)
        << "\n";
    return 0;
  }
  for (const auto& r : reports) {
    out << r.snippet_id << ": " << r.findings.size() << " finding(s)\n";
    for (const auto& f : r.findings)
      out << "  line " << f.line << "  " << patterns::to_string(f.pattern) << "  " << f.detail << "\n";
  }
  if (reports.size() > 1) {
    out << "pattern counts:\n";
    for (const auto& [p, c] : counts) out << "  " << p << " " << c << "\n";
    out << "first issue line:\n";
    for (const auto& [l, f] : dist) out << "  line " << l << " " << fmt("%.3f", f) << "\n";
  }
  return 0;
}

// --- decode

int cmd_decode(const Global& g, const ProviderOpts& p, const CheckerOpts& c, const DecodeOpts& d,
               const std::string& prompt, const std::string& signature, const std::string& record,
               std::ostream& out) {
  auto provider = make_provider(p);
  auto cfg = make_config(d, g, provider.get());
  if (!record.empty()) {
    // mode off, every frame kept
    auto trace = decode::record_trace(*provider, read_text_arg(prompt), cfg.max_tokens);
    io::write_jsonl(record, trace.to_rows());
    std::string text;
    for (const auto& s : trace.steps)
      for (const auto& e : s.frame.candidates)
        if (e.token_id == s.chosen_id && (!trace.eos_id || e.token_id != *trace.eos_id)) text += e.text;
    if (g.json)
      out << json{{"trace", record}, {"steps", trace.steps.size()}, {"text", text}}.dump(2) << "\n";
    else
      out << "recorded " << trace.steps.size() << " frames to " << record << "\n";
    return 0;
  }
  std::unique_ptr<checker::Checker> chk;
  if (cfg.mode == decode::Mode::Full) chk = make_checker(c);
  auto rec = decode::run_decode(*provider, chk.get(), {read_text_arg(prompt), read_text_arg(signature), {}}, cfg);
  if (g.json) {
    out << json(rec).dump(2) << "\n";
  } else {
    out << rec.text;
    if (!rec.text.empty() && rec.text.back() != '\n') out << "\n";
  }
  return 0;
}

// --- calibrate / rank-hist

std::vector<decode::LogitFrame> frames_of(const std::string& trace_path) {
  std::vector<decode::LogitFrame> frames;
  for (auto& s : decode::Trace::load(trace_path).steps) frames.push_back(std::move(s.frame));
  return frames;
}

std::set<decode::TokenId> if_ids_of(const std::vector<decode::LogitFrame>& frames, bool extended) {
  decode::Vocabulary vocab;
  std::set<decode::TokenId> seen;
  for (const auto& f : frames)
    for (const auto& c : f.candidates)
      if (seen.insert(c.token_id).second) vocab.emplace_back(c.token_id, c.text);
  return decode::build_if_token_set(vocab, extended);
}

int cmd_calibrate(const Global& g, const std::string& obs_path, const std::string& trace_path, double pct,
                  bool extended, std::ostream& out) {
  std::vector<decode::Observation> obs;
  if (!obs_path.empty()) {
    std::size_t n = 0;
    for (const auto& row : io::read_jsonl(obs_path)) {
      ++n;
      try {
        obs.push_back(row.get<decode::Observation>());
      } catch (const json::exception& e) {
        throw Error(ErrorKind::Format, obs_path + ": record " + std::to_string(n) + ": " + e.what());
      }
    }
  } else if (!trace_path.empty()) {
    auto frames = frames_of(trace_path);
    obs = decode::observations_from_frames(frames, if_ids_of(frames, extended));
  } else {
    throw CLI::ValidationError("calibrate", "give --obs or --trace");
  }
  double delta = decode::calibrate_delta(obs, pct);
  std::size_t covered = 0;
  for (const auto& o : obs) covered += decode::normalized_gap(o) <= delta;
  if (g.json) {
    out << json{{"delta", delta}, {"percentile", pct}, {"n", obs.size()}, {"covered", covered}}.dump(2) << "\n";
  } else {
    out << "delta: " << fmt("%.6g", delta) << "\n";
    out << "observations: " << obs.size() << ", covered: " << covered << "\n";
  }
  return 0;
}

int cmd_rank_hist(const Global& g, const std::string& trace_path, std::size_t max_rank, bool extended,
                  std::ostream& out) {
  auto frames = frames_of(trace_path);
  auto h = decode::rank_histogram(frames, if_ids_of(frames, extended), max_rank);
  if (g.json) {
    out << json(h).dump(2) << "\n";
    return 0;
  }
  out << "frames: " << h.n << "\n";
  for (const auto& [rank, count] : h.counts)
    out << "rank " << rank << ": " << count << " (" << fmt("%.3f", h.fraction(rank)) << ")\n";
  out << "absent: " << h.absent << " (" << fmt("%.3f", h.absent_fraction()) << ")\n";
  return 0;
}

// --- checker-data

int cmd_checker_data(const Global& g, const std::vector<std::string>& repos, std::size_t pos, std::size_t neg,
                     bool all, bool else_if, double holdout, const std::string& out_path, std::ostream& out) {
  std::vector<checker::SourceFile> files;
  for (const auto& r : repos) {
    auto f = checker::load_repo(r);
    files.insert(files.end(), f.begin(), f.end());
  }
  checker::DatasetOptions opts{else_if, g.jobs};
  checker::EnumerationStats st;
  auto samples = all ? checker::enumerate_samples(files, opts, &st)
                     : checker::build_checker_dataset(files, pos, neg, g.seed, opts, &st);
  auto rows = [](const std::vector<checker::CheckerSample>& v) {
    std::vector<json> r;
    for (const auto& s : v) r.push_back(s);
    return r;
  };
  std::size_t train_n = samples.size(), hold_n = 0;
  if (!out_path.empty()) {
    if (holdout > 0.0) {
      auto [train, hold] = checker::split_holdout(samples, holdout, g.seed);
      train_n = train.size();
      hold_n = hold.size();
      io::write_jsonl(out_path, rows(train));
      io::write_jsonl(out_path + ".holdout", rows(hold));
    } else {
      io::write_jsonl(out_path, rows(samples));
    }
  } else if (!g.json) {
    for (const auto& r : rows(samples)) out << r.dump() << "\n";
    return 0;
  }
  json summary{{"files", st.files},         {"methods", st.methods},   {"skipped_methods", st.skipped_methods},
               {"positives", st.positives}, {"negatives", st.negatives}, {"written", train_n},
               {"holdout", hold_n}};
  if (g.json) {
    if (out_path.empty()) summary["samples"] = rows(samples);
    out << summary.dump(2) << "\n";
  } else {
    out << "files " << st.files << ", methods " << st.methods << " (" << st.skipped_methods << " skipped), "
        << "positives " << st.positives << ", negatives " << st.negatives << "\n";
    out << "wrote " << train_n << " samples to " << out_path;
    if (hold_n) out << " and " << hold_n << " to " << out_path << ".holdout";
    out << "\n";
  }
  return 0;
}

// --- judge

struct JudgeCliOpts {
  std::string pairs;
  std::string config;
  std::string tmpl;
  std::string human;
  std::string out_dir;
  int repeats = 3;
  double tie_epsilon = 0.0;
  bool fractional = false;
};

judge::JudgeOptions judge_options(const JudgeCliOpts& o, const Global& g) {
  judge::JudgeOptions opts;
  opts.repeats = o.repeats;
  opts.tie_epsilon = o.tie_epsilon;
  opts.allow_fractional = o.fractional;
  opts.parallelism = g.jobs;
  if (!o.tmpl.empty()) opts.tmpl = judge::JudgeTemplate::load(o.tmpl);
  return opts;
}

judge::ChatConfig chat_config(const std::string& path) {
  if (path.empty()) return {};
  return judge::ChatConfig::from_json(json::parse(io::read_file(path)));
}

void print_distribution(std::ostream& out, const std::string& label, const std::vector<judge::JudgeVerdict>& vs) {
  std::vector<judge::Verdict> labels;
  for (const auto& v : vs) labels.push_back(v.verdict);
  auto d = judge::verdict_distribution(labels);
  out << label << "generated_better " << fmt("%.3f", d.generated_better) << ", tie " << fmt("%.3f", d.tie)
      << ", human_better " << fmt("%.3f", d.human_better) << " (n=" << vs.size() << ")\n";
}

int cmd_judge(const Global& g, const JudgeCliOpts& o, std::ostream& out) {
  std::vector<judge::JudgeTask> tasks;
  std::size_t n = 0;
  for (const auto& row : io::read_jsonl(o.pairs)) {
    ++n;
    try {
      auto id = row.at("task_id").get<std::string>();
      tasks.push_back(judge::make_task(id, {id, row.at("generated").get<std::string>(), Origin::Generated, "java"},
                                       {id, row.at("reference").get<std::string>(), Origin::Reference, "java"},
                                       g.seed));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, o.pairs + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  judge::HttpChatClient client(chat_config(o.config));
  std::optional<fs::path> dir;
  if (!o.out_dir.empty()) dir = o.out_dir;
  auto run = judge::run_judge(tasks, client, judge_options(o, g), dir);

  std::optional<double> kappa;
  if (!o.human.empty()) {
    std::map<std::string, judge::Verdict> human;
    for (const auto& row : io::read_jsonl(o.human))
      human[row.at("task_id").get<std::string>()] = judge::verdict_from_string(row.at("verdict").get<std::string>());
    std::vector<judge::Verdict> a, b;
    for (const auto& v : run.verdicts) {
      if (auto it = human.find(v.task_id); it != human.end()) {
        a.push_back(v.verdict);
        b.push_back(it->second);
      }
    }
    kappa = judge::kappa_validate(a, b);
  }
  if (g.json) {
    json j{{"verdicts", run.verdicts}, {"failures", json::array()}};
    for (const auto& f : run.failures) j["failures"].push_back({{"task_id", f.task_id}, {"error", f.error}});
    j["kappa"] = kappa ? json(*kappa) : json(nullptr);
    out << j.dump(2) << "\n";
  } else {
    for (const auto& v : run.verdicts)
      out << v.task_id << "  " << judge::to_string(v.assignment) << "  avg " << fmt("%.2f", v.avg) << "  "
          << judge::to_string(v.verdict) << "\n";
    for (const auto& f : run.failures) out << f.task_id << "  FAILED  " << f.error << "\n";
    if (!run.verdicts.empty()) print_distribution(out, "", run.verdicts);
    if (kappa) out << "kappa " << fmt("%.4f", *kappa) << "\n";
  }
  return run.failures.empty() ? 0 : 1;
}

// --- bench / pgi

struct BenchCliOpts {
  std::string tasks;
  std::vector<std::string> methods;
  std::string trace_dir;
  std::string executor_cmd;
  std::string compile_cmd;
  bool parse_executor = false;
  std::size_t repeats = 1;
  std::string runs_root = ".";
  std::string judge_config;
  std::string judge_template;
};

int cmd_bench(const Global& g, const BenchCliOpts& o, const ProviderOpts& p, const CheckerOpts& c,
              const DecodeOpts& d, std::ostream& out) {
  auto tasks = bench::load_tasks(o.tasks);
  bench::BenchOptions opts;
  opts.methods.clear();
  if (o.methods.empty()) opts.methods = bench::all_methods();
  for (const auto& m : o.methods) opts.methods.push_back(bench::method_from_string(m));
  opts.profile = bench::profile_from_string(g.profile);
  opts.repeats = o.repeats;
  opts.jobs = g.jobs;

  if (p.kind == "trace" && o.trace_dir.empty()) throw CLI::RequiredError("--trace-dir (with --provider trace)");
  std::optional<decode::ToyLmModel> model;
  if (p.kind == "toy") {
    if (p.model.empty()) throw CLI::RequiredError("--model (with --provider toy)");
    model = decode::ToyLmModel::load(p.model);
    decode::ToyLmProvider probe(*model, p.top_k);
    opts.run.decode = make_config(d, g, &probe);
  } else {
    opts.run.decode = make_config(d, g, nullptr);
  }
  bench::ProviderFactory providers = [&](const bench::TaskRecord& t) -> std::unique_ptr<decode::TokenProvider> {
    if (model) return std::make_unique<decode::ToyLmProvider>(*model, p.top_k);
    return std::make_unique<decode::TraceReplayProvider>(
        decode::Trace::load(fs::path(o.trace_dir) / (t.task_id + ".jsonl")));
  };
  bench::CheckerFactory checkers = [&](const bench::TaskRecord&) { return make_checker(c); };

  std::unique_ptr<bench::Executor> exec;
  if (!o.executor_cmd.empty() || !o.compile_cmd.empty())
    exec = std::make_unique<bench::CommandExecutor>(o.compile_cmd, o.executor_cmd);
  else
    exec = std::make_unique<bench::ParseExecutor>();

  auto run_dir = bench::new_run_dir(o.runs_root);
  auto results = bench::run_bench(tasks, providers, checkers, *exec, opts, run_dir);

  std::map<bench::Method, std::vector<judge::JudgeVerdict>> verdicts;
  if (!o.judge_config.empty()) {
    judge::HttpChatClient client(chat_config(o.judge_config));
    JudgeCliOpts jo;
    jo.tmpl = o.judge_template;
    auto jopts = judge_options(jo, g);
    std::map<std::string, const bench::TaskRecord*> by_id;
    for (const auto& t : tasks) by_id[t.task_id] = &t;
    for (const auto& [m, rs] : results) {
      std::vector<judge::JudgeTask> jt;
      for (const auto& r : rs)
        if (!r.generated.source.empty())
          jt.push_back(judge::make_task(r.task_id, r.generated, by_id[r.task_id]->reference, g.seed));
      auto jr = judge::run_judge(jt, client, jopts, run_dir / "transcripts" / std::string(bench::to_string(m)));
      for (const auto& f : jr.failures)
        log::warn("judge " + std::string(bench::to_string(m)) + "/" + f.task_id + ": " + f.error);
      verdicts[m] = std::move(jr.verdicts);
    }
  }
  auto report = bench::emit_report(tasks, results, verdicts, opts.profile);
  bench::write_run(run_dir, results, report);
  if (g.json) {
    out << json{{"run_dir", run_dir.string()}, {"report", report}}.dump(2) << "\n";
  } else {
    out << bench::to_text(report);
    if (results.count(bench::Method::Greedy)) {
      try {
        out << "\nruntime (minutes):\n" << bench::runtime_report(results, tasks.size()).text;
      } catch (const Error& e) {
        out << "runtime table unavailable: " << e.what() << "\n";
      }
    }
    out << "run directory: " << run_dir.string() << "\n";
  }
  return 0;
}

int cmd_pgi(const Global& g, const std::string& snippet_path, const std::string& signature, const ProviderOpts& p,
            std::size_t max_tokens, std::ostream& out) {
  bench::TaskRecord task;
  task.task_id = fs::path(snippet_path).stem().string();
  task.signature = signature;
  CodeSnippet gen{task.task_id, io::read_file(snippet_path), Origin::Generated, "java"};
  auto provider = make_provider(p);
  bench::PgiOptions opts;
  opts.max_tokens = max_tokens;
  auto res = bench::pgi_insert(gen, task, *provider, opts);
  if (g.json) {
    out << json{{"id", res.id}, {"changed", res.source != gen.source}, {"source", res.source}}.dump(2) << "\n";
  } else {
    out << res.source;
    if (!res.source.empty() && res.source.back() != '\n') out << "\n";
  }
  return 0;
}

// --- stats

stats::ContingencyTable load_table(const std::string& path) {
  auto j = json::parse(io::read_file(path));
  const json& counts = j.is_object() ? j.at("counts") : j;
  try {
    return {counts.get<std::vector<std::vector<std::uint64_t>>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, path + ": " + e.what());
  }
}

int cmd_stats_chi2(const Global& g, const std::string& path, bool yates, std::ostream& out) {
  auto t = load_table(path);
  auto r = stats::chi_square(t, {yates});
  double v = stats::cramers_v(r.chi2, t.n(), t.rows(), t.cols());
  if (g.json) {
    out << json{{"chi2", r.chi2}, {"dof", r.dof}, {"p_value", r.p_value}, {"cramers_v", v}}.dump(2) << "\n";
  } else {
    out << "chi2 " << fmt("%.6f", r.chi2) << "  dof " << r.dof << "  p " << fmt("%.6g", r.p_value)
        << "  V " << fmt("%.6f", v) << "\n";
  }
  return 0;
}

int cmd_stats_kappa(const Global& g, const std::string& path, std::ostream& out) {
  auto t = load_table(path);
  auto k = stats::cohen_kappa(t.counts);
  if (k.degenerate) throw Error(ErrorKind::DegenerateAgreement, "expected agreement is 1; kappa undefined");
  if (g.json)
    out << json{{"kappa", k.kappa}, {"p_o", k.p_o}, {"p_e", k.p_e}}.dump(2) << "\n";
  else
    out << "kappa " << fmt("%.6f", k.kappa) << "  p_o " << fmt("%.6f", k.p_o) << "  p_e " << fmt("%.6f", k.p_e)
        << "\n";
  return 0;
}

int cmd_stats_percentile(const Global& g, const std::string& path, double p, std::ostream& out) {
  auto values = json::parse(io::read_file(path)).get<std::vector<double>>();
  double v = stats::percentile_nearest_rank(values, p);
  if (g.json)
    out << json{{"p", p}, {"value", v}, {"n", values.size()}}.dump(2) << "\n";
  else
    out << fmt("%.6g", v) << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robustness analysis and guarded decoding for generated Java code", "robgen"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_flag("--json", g.json, "Machine-readable output");
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--jobs", g.jobs, "Worker pool size")->check(CLI::PositiveNumber);
  app.add_option("--profile", g.profile, "empirical (300 tokens, compiled-only metrics) or eval (1024, all)")
      ->check(CLI::IsMember({"empirical", "eval"}));
  app.add_flag("-v,--verbose", g.verbose, "Log info messages");

  ProviderOpts prov;
  CheckerOpts chk;
  DecodeOpts dec;

  auto* metrics_cmd = app.add_subcommand("metrics", "AvgABE and EHAR over a snippet corpus");
  std::string corpus;
  bool strict_catch = false, csv = false;
  metrics_cmd->add_option("corpus", corpus, "Directory of .java files or a JSONL corpus")->required();
  metrics_cmd->add_flag("--strict-catch", strict_catch, "Only count try statements with a catch");
  metrics_cmd->add_flag("--csv", csv, "Per-snippet CSV");

  auto* patterns_cmd = app.add_subcommand("patterns", "Diff guards between generated and reference code");
  std::string pairs, gen_file, ref_file, scope;
  bool strict_scope = false;
  patterns_cmd->add_option("--pairs", pairs, "JSONL of {id, generated, reference, scope_symbols}");
  patterns_cmd->add_option("--generated", gen_file, "Generated method source");
  patterns_cmd->add_option("--reference", ref_file, "Reference method source");
  patterns_cmd->add_option("--scope", scope, "Comma-separated in-scope symbols");
  patterns_cmd->add_flag("--strict-scope", strict_scope, "Fail when no scope symbols are given");

  auto* decode_cmd = app.add_subcommand("decode", "Greedy decoding with the selective if boost");
  std::string prompt, signature, record;
  add_provider_flags(decode_cmd, prov);
  add_checker_flags(decode_cmd, chk);
  add_decode_flags(decode_cmd, dec);
  decode_cmd->add_option("--prompt", prompt, "Prompt text, or @file");
  decode_cmd->add_option("--signature", signature, "Method signature shown to the checker, or @file");
  decode_cmd->add_option("--record", record, "Decode with interventions off and write the logit trace here");

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Nearest-rank percentile of normalized if gaps");
  std::string obs, cal_trace;
  double pct = 0.9;
  bool cal_ext = false;
  calibrate_cmd->add_option("--obs", obs, "JSONL of {logit_top1, logit_if, rank_if}");
  calibrate_cmd->add_option("--trace", cal_trace, "Derive observations from a logit trace");
  calibrate_cmd->add_option("--percentile", pct, "Percentile in (0, 1]")->check(CLI::Range(0.0, 1.0));
  calibrate_cmd->add_flag("--extended-if", cal_ext, "Also treat 'if(' and 'if (' tokens as if");

  auto* hist_cmd = app.add_subcommand("rank-hist", "Histogram of the if token's rank over a trace");
  std::string hist_trace;
  std::size_t max_rank = 30;
  bool hist_ext = false;
  hist_cmd->add_option("--trace", hist_trace, "Logit trace JSONL")->required();
  hist_cmd->add_option("--max-rank", max_rank, "Ranks beyond this count as absent")->check(CLI::PositiveNumber);
  hist_cmd->add_flag("--extended-if", hist_ext, "Also treat 'if(' and 'if (' tokens as if");

  auto* data_cmd = app.add_subcommand("checker-data", "Build the checker's (prefix, label) dataset");
  std::vector<std::string> repos;
  std::size_t n_pos = 4000, n_neg = 8000;
  bool all_samples = false, else_if = false;
  double holdout = 0.0;
  std::string data_out;
  data_cmd->add_option("--repo", repos, "Repository root (repeatable)")->required();
  data_cmd->add_option("--positives", n_pos, "Positive samples to keep");
  data_cmd->add_option("--negatives", n_neg, "Negative samples to keep");
  data_cmd->add_flag("--all", all_samples, "Every sample, no down-sampling");
  data_cmd->add_flag("--else-if-positive", else_if, "Count 'else if' lines as positive");
  data_cmd->add_option("--holdout", holdout, "Fraction held out (written to <out>.holdout)")
      ->check(CLI::Range(0.0, 1.0));
  data_cmd->add_option("--out", data_out, "Output JSONL");

  auto* judge_cmd = app.add_subcommand("judge", "Pairwise LLM robustness judgement");
  JudgeCliOpts jo;
  judge_cmd->add_option("--pairs", jo.pairs, "JSONL of {task_id, generated, reference}")->required();
  judge_cmd->add_option("--config", jo.config, "Endpoint config JSON");
  judge_cmd->add_option("--template", jo.tmpl, "Prompt template file");
  judge_cmd->add_option("--human", jo.human, "JSONL of {task_id, verdict} for kappa");
  judge_cmd->add_option("--out", jo.out_dir, "Directory for verdicts.json and transcripts");
  judge_cmd->add_option("--repeats", jo.repeats, "Calls per pair")->check(CLI::PositiveNumber);
  judge_cmd->add_option("--tie-epsilon", jo.tie_epsilon, "Half-width of the tie band around 3");
  judge_cmd->add_flag("--allow-fractional", jo.fractional, "Accept fractional scores");

  auto* bench_cmd = app.add_subcommand("bench", "Run tasks under each method and report");
  BenchCliOpts bo;
  bench_cmd->add_option("--tasks", bo.tasks, "Task JSONL")->required();
  bench_cmd->add_option("--method", bo.methods, "greedy, rp, pgi, robgen_no_checker, robgen (repeatable)");
  add_provider_flags(bench_cmd, prov);
  add_checker_flags(bench_cmd, chk);
  add_decode_flags(bench_cmd, dec);
  bench_cmd->add_option("--trace-dir", bo.trace_dir, "Directory of <task_id>.jsonl traces");
  bench_cmd->add_option("--executor-cmd", bo.executor_cmd, "Test command; {task_dir} and {task_id} substituted");
  bench_cmd->add_option("--compile-cmd", bo.compile_cmd, "Compile command; same substitutions");
  bench_cmd->add_option("--repeats", bo.repeats, "Runs per task; wall time averaged")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--runs-root", bo.runs_root, "Where runs/<timestamp>/ is created");
  bench_cmd->add_option("--judge-config", bo.judge_config, "Judge endpoint config; enables the judge");
  bench_cmd->add_option("--judge-template", bo.judge_template, "Judge prompt template");

  auto* pgi_cmd = app.add_subcommand("pgi", "Fill-in-the-middle guard insertion into one snippet");
  std::string pgi_file, pgi_sig;
  std::size_t pgi_tokens = 128;
  pgi_cmd->add_option("--snippet", pgi_file, "Generated method source")->required();
  pgi_cmd->add_option("--signature", pgi_sig, "Method signature");
  pgi_cmd->add_option("--max-tokens", pgi_tokens, "Token limit for the fill")->check(CLI::PositiveNumber);
  add_provider_flags(pgi_cmd, prov);

  auto* stats_cmd = app.add_subcommand("stats", "Chi-square, Cohen's kappa and percentiles");
  stats_cmd->require_subcommand(1);
  std::string table_path, values_path;
  bool yates = false;
  double stats_p = 0.9;
  auto* chi2_cmd = stats_cmd->add_subcommand("chi2", "Chi-square test and Cramer's V");
  chi2_cmd->add_option("--table", table_path, "JSON counts matrix")->required();
  chi2_cmd->add_flag("--yates", yates, "Continuity correction (2x2 only)");
  auto* kappa_cmd = stats_cmd->add_subcommand("kappa", "Cohen's kappa from a confusion matrix");
  kappa_cmd->add_option("--table", table_path, "JSON confusion matrix")->required();
  auto* pct_cmd = stats_cmd->add_subcommand("percentile", "Nearest-rank percentile");
  pct_cmd->add_option("--values", values_path, "JSON array of numbers")->required();
  pct_cmd->add_option("--p", stats_p, "Percentile in (0, 1]")->check(CLI::Range(0.0, 1.0));

  std::vector<std::string> rev(args.rbegin(), args.rend());
  auto usage = [&](const std::string& msg, const CLI::App* sub) {
    err << "error: " << msg << "\n\n" << (sub ? sub->help() : app.help());
    return 2;
  };
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* sub = &app;
    for (auto* s : app.get_subcommands()) {
      sub = s;
      for (auto* s2 : s->get_subcommands()) sub = s2;
    }
    out << sub->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    return usage(e.what(), sub);
  }

  auto previous = log::set_sink([&err](log::Level level, std::string_view m) {
    static const char* names[] = {"debug", "info", "warning", "error"};
    err << names[static_cast<int>(level)] << ": " << m << "\n";
  });
  log::set_min_level(g.verbose ? log::Level::Info : log::Level::Warning);
  struct Restore {
    log::Sink s;
    ~Restore() {
      log::set_sink(s);
      log::set_min_level(log::Level::Warning);
    }
  } restore{previous};

  try {
    if (metrics_cmd->parsed()) return cmd_metrics(g, corpus, strict_catch, csv, out);
    if (patterns_cmd->parsed()) return cmd_patterns(g, pairs, gen_file, ref_file, scope, strict_scope, out);
    if (decode_cmd->parsed()) return cmd_decode(g, prov, chk, dec, prompt, signature, record, out);
    if (calibrate_cmd->parsed()) return cmd_calibrate(g, obs, cal_trace, pct, cal_ext, out);
    if (hist_cmd->parsed()) return cmd_rank_hist(g, hist_trace, max_rank, hist_ext, out);
    if (data_cmd->parsed())
      return cmd_checker_data(g, repos, n_pos, n_neg, all_samples, else_if, holdout, data_out, out);
    if (judge_cmd->parsed()) return cmd_judge(g, jo, out);
    if (bench_cmd->parsed()) return cmd_bench(g, bo, prov, chk, dec, out);
    if (pgi_cmd->parsed()) return cmd_pgi(g, pgi_file, pgi_sig, prov, pgi_tokens, out);
    if (chi2_cmd->parsed()) return cmd_stats_chi2(g, table_path, yates, out);
    if (kappa_cmd->parsed()) return cmd_stats_kappa(g, table_path, out);
    if (pct_cmd->parsed()) return cmd_stats_percentile(g, values_path, stats_p, out);
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands()) sub = s;
    return usage(e.what(), sub);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return usage("no subcommand", nullptr);
}

}  // namespace robgen::cli
