#include "robgen/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <set>
#include <thread>

#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/java/lexer.hpp"
#include "robgen/java/parser.hpp"
#include "robgen/java/signature.hpp"
#include "robgen/log.hpp"
#include "robgen/metrics/atoms.hpp"

namespace robgen::bench {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kStandardTemplate =
    R"(You are an expert {language} programmer. Implement the method described below.

Description:
{description}

{context}Method signature:
{signature}

{requirements}Write the complete method, starting with the signature above. Output only code.
)";

constexpr const char* kRequirements =
    R"(Robustness requirements:
- Validate every input before use: null references, empty strings and collections, out-of-range numbers.
- Check boundary conditions on indices, sizes and loop bounds.
- Handle exceptions raised by called code instead of letting them escape unnoticed.

)";

// Single pass over the template, so substituted text is never rescanned.
std::string fill(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t at = 0;
  while (at < tmpl.size()) {
    std::size_t open = tmpl.find('{', at);
    if (open == std::string::npos) break;
    std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos) break;
    auto it = values.find(tmpl.substr(open + 1, close - open - 1));
    if (it == values.end()) {
      out.append(tmpl, at, open + 1 - at);
      at = open + 1;
      continue;
    }
    out.append(tmpl, at, open - at);
    out += it->second;
    at = close + 1;
  }
  out.append(tmpl, std::min(at, tmpl.size()), std::string::npos);
  return out;
}

std::string file_safe(std::string_view id) {
  std::string out;
  for (char c : id)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  return out.empty() ? "_" : out;
}

std::string trim_ws(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

struct Tok {
  std::string_view text;
  std::size_t offset;
};

std::vector<Tok> tokens_of(std::string_view src) {
  auto lx = java::lex(src);
  std::vector<Tok> out;
  for (const auto& t : lx.tokens) {
    if (t.kind == java::TokenKind::Eof) break;
    out.push_back({src.substr(t.offset, t.length), t.offset});
  }
  return out;
}

const java::Node* method_body(const java::SyntaxTree& t) {
  const java::Node* body = nullptr;
  java::walk(t.root(), [&](const java::Node& n) {
    if (body) return false;
    if (n.kind == java::NodeKind::MethodDecl && !n.children.empty() &&
        n.children.back().kind == java::NodeKind::Block) {
      body = &n.children.back();
      return false;
    }
    return true;
  });
  return body;
}

struct Metrics {
  std::size_t atoms = 0;
  bool try_catch = false;
};

// Tolerant: a snippet without a method counts as zero atoms and no try.
Metrics snippet_metrics(const std::string& source) {
  try {
    auto tree = metrics::parse_snippet(source);
    return {metrics::extract_atoms(tree, "").count, metrics::has_exception_handling(tree)};
  } catch (const Error&) {
    return {};
  }
}

json fraction_json(const Fraction& f) {
  return {{"count", f.count}, {"total", f.total}, {"fraction", f.value()}};
}

Fraction fraction_from(const json& j) {
  return {j.at("count").get<std::size_t>(), j.at("total").get<std::size_t>()};
}

}  // namespace

void to_json(json& j, const TaskRecord& t) {
  j = json{{"task_id", t.task_id},     {"docstring", t.docstring}, {"signature", t.signature},
           {"context", t.context},     {"reference", t.reference.source}};
  if (t.test_command) j["test_command"] = *t.test_command;
}

void from_json(const json& j, TaskRecord& t) {
  t.task_id = j.at("task_id").get<std::string>();
  t.docstring = j.value("docstring", std::string());
  t.signature = j.at("signature").get<std::string>();
  t.context = j.value("context", std::string());
  t.reference = {t.task_id, j.at("reference").get<std::string>(), Origin::Reference, "java"};
  if (j.contains("test_command") && !j["test_command"].is_null())
    t.test_command = j["test_command"].get<std::string>();
}

std::vector<TaskRecord> load_tasks(const fs::path& path) {
  std::vector<TaskRecord> out;
  std::set<std::string> seen;
  std::size_t row = 0;
  for (const auto& j : io::read_jsonl(path)) {
    ++row;
    auto where = path.string() + " row " + std::to_string(row);
    TaskRecord t;
    try {
      t = j.get<TaskRecord>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, where + ": " + e.what());
    }
    if (trim_ws(t.signature).empty()) throw Error(ErrorKind::Format, where + ": empty signature");
    if (!seen.insert(t.task_id).second)
      throw Error(ErrorKind::Format, where + ": duplicate task id " + t.task_id);
    try {
      if (!metrics::parse_snippet(t.reference.source).ok())
        throw Error(ErrorKind::Format, "syntax error");
    } catch (const Error& e) {
      throw Error(ErrorKind::Format, where + ": reference of " + t.task_id + " does not parse (" + e.what() + ")");
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Greedy: return "greedy";
    case Method::Rp: return "rp";
    case Method::Pgi: return "pgi";
    case Method::RobgenNoChecker: return "robgen_no_checker";
    case Method::Robgen: return "robgen";
  }
  return "greedy";
}

Method method_from_string(std::string_view s) {
  for (Method m : all_methods())
    if (to_string(m) == s) return m;
  if (s == "robgen-no-checker") return Method::RobgenNoChecker;
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(s) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::Greedy, Method::Rp, Method::Pgi,
                                       Method::RobgenNoChecker, Method::Robgen};
  return all;
}

std::string_view to_string(Profile p) noexcept { return p == Profile::Empirical ? "empirical" : "eval"; }

Profile profile_from_string(std::string_view s) {
  if (s == "empirical") return Profile::Empirical;
  if (s == "eval") return Profile::Eval;
  throw Error(ErrorKind::InvalidArgument, "unknown profile '" + std::string(s) + "'");
}

std::size_t default_max_tokens(Profile p) noexcept { return p == Profile::Empirical ? 300 : 1024; }

PromptTemplates PromptTemplates::defaults() { return {kStandardTemplate, kRequirements}; }

std::string build_prompt(const TaskRecord& task, PromptVariant variant,
                         const PromptTemplates& templates) {
  for (std::string_view ph : {"{description}", "{signature}"})
    if (templates.standard.find(ph) == std::string::npos)
      throw Error(ErrorKind::TemplateMissing, "prompt template lacks " + std::string(ph));
  if (variant == PromptVariant::RobustCoder &&
      templates.standard.find("{requirements}") == std::string::npos)
    throw Error(ErrorKind::TemplateMissing, "prompt template lacks {requirements}");
  std::string context;
  if (!trim_ws(task.context).empty())
    context = "Context:\n" + trim_ws(task.context) + "\n\n";
  return fill(templates.standard,
              {{"language", task.reference.language.empty() ? "java" : task.reference.language},
               {"description", trim_ws(task.docstring)},
               {"context", context},
               {"signature", trim_ws(task.signature)},
               {"requirements", variant == PromptVariant::RobustCoder ? templates.requirements : ""}});
}

CodeSnippet trim_output(std::string_view raw, std::string_view signature, std::string id) {
  auto make = [&](std::size_t a, std::size_t b) {
    return CodeSnippet{id, std::string(raw.substr(a, b - a)), Origin::Generated, "java"};
  };
  auto sig = tokens_of(signature);
  while (!sig.empty() && (sig.back().text == "{" || sig.back().text == ";")) sig.pop_back();
  const auto toks = tokens_of(raw);
  if (!sig.empty()) {
    for (std::size_t i = 0; i + sig.size() <= toks.size(); ++i) {
      bool same = true;
      for (std::size_t k = 0; k < sig.size() && same; ++k) same = toks[i + k].text == sig[k].text;
      if (!same) continue;
      // the signature may stop before a throws clause
      std::size_t j = i + sig.size();
      while (j < toks.size() && toks[j].text != "{") {
        auto t = toks[j].text;
        bool ok = t == "throws" || t == "," || t == "." ||
                  std::isalpha(static_cast<unsigned char>(t.front())) || t.front() == '_' || t.front() == '$';
        if (!ok) break;
        ++j;
      }
      if (j >= toks.size() || toks[j].text != "{") continue;
      if (auto end = java::matching_brace(raw, toks[j].offset)) return make(toks[i].offset, *end);
    }
  }
  if (auto header = java::find_signature(raw)) {
    if (auto end = java::matching_brace(raw, header->body_open)) return make(header->start, *end);
  }
  throw Error(ErrorKind::Untrimmable, "no complete method in output" +
                                          (id.empty() ? std::string() : " for " + id));
}

ExecResult StubExecutor::compile(const TaskRecord&, const CodeSnippet&, const fs::path&) {
  return {compiles_, compiles_ ? 0 : 1, "stub"};
}

ExecResult StubExecutor::test(const TaskRecord&, const CodeSnippet&, const fs::path&) {
  return {passes_, passes_ ? 0 : 1, "stub"};
}

ExecResult ParseExecutor::compile(const TaskRecord&, const CodeSnippet& code, const fs::path&) {
  try {
    auto t = metrics::parse_snippet(code.source);
    if (t.ok()) return {true, 0, ""};
    const auto& e = t.errors().front();
    return {false, 1, "line " + std::to_string(e.line) + ": " + e.message};
  } catch (const Error& e) {
    return {false, 1, e.what()};
  }
}

ExecResult ParseExecutor::test(const TaskRecord&, const CodeSnippet&, const fs::path&) {
  return {false, 1, "no test runner"};
}

ExecResult run_command(const std::string& command) {
  ExecResult r;
  std::string cmd = command + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw Error(ErrorKind::Io, "cannot run: " + command);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.log.append(buf, n);
  int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  r.ok = r.exit_code == 0;
  return r;
}

std::string substitute(std::string command, const TaskRecord& task, const fs::path& task_dir) {
  return fill(command, {{"task_dir", task_dir.string()}, {"task_id", task.task_id}});
}

CommandExecutor::CommandExecutor(std::string compile_cmd, std::string test_cmd)
    : compile_cmd_(std::move(compile_cmd)), test_cmd_(std::move(test_cmd)) {}

ExecResult CommandExecutor::compile(const TaskRecord& task, const CodeSnippet& code,
                                    const fs::path& task_dir) {
  fs::create_directories(task_dir);
  io::write_file(task_dir / "Generated.java", code.source);
  io::write_file(task_dir / "task.json", json(task).dump(2) + "\n");
  if (compile_cmd_.empty()) return {true, 0, "no compile command"};
  return run_command(substitute(compile_cmd_, task, task_dir));
}

ExecResult CommandExecutor::test(const TaskRecord& task, const CodeSnippet&, const fs::path& task_dir) {
  std::string cmd = !test_cmd_.empty() ? test_cmd_ : task.test_command.value_or("");
  if (cmd.empty()) return {false, 1, "no test command"};
  return run_command(substitute(cmd, task, task_dir));
}

std::string build_fim_prompt(const CodeSnippet& generated, const FimTokens& fim) {
  auto sig = java::find_signature(generated.source);
  if (!sig) throw Error(ErrorKind::InvalidArgument, "no method header in " + generated.id);
  const std::string& s = generated.source;
  return fim.prefix + s.substr(0, sig->body_open + 1) + "\n" + fim.suffix + s.substr(sig->body_open + 1) +
         fim.middle;
}

CodeSnippet pgi_insert(const CodeSnippet& generated, const TaskRecord& task,
                       decode::TokenProvider& provider, const PgiOptions& options) {
  const std::string& src = generated.source;
  auto original = java::parse_source(src);
  auto sig = java::find_signature(src);
  const java::Node* body = original.ok() ? method_body(original) : nullptr;
  if (!sig || !body) {
    log::warn("pgi: " + generated.id + " does not parse; left unchanged");
    return generated;
  }

  decode::DecodeRecord rec;
  try {
    decode::InterventionConfig cfg;
    cfg.mode = decode::Mode::Off;
    cfg.max_tokens = options.max_tokens;
    rec = decode::run_decode(provider, nullptr, {build_fim_prompt(generated, options.fim), task.signature, {}}, cfg);
  } catch (const Error& e) {
    log::warn(std::string("pgi: ") + e.what() + "; " + generated.id + " left unchanged");
    return generated;
  }
  std::string fill = trim_ws(rec.text);
  if (fill.empty()) return generated;
  auto stmts = java::parse_statements(fill);
  if (!stmts.ok() || stmts.root().children.empty() || stmts.root().children[0].kind != java::NodeKind::If)
    return generated;

  // a fill that repeats the body's opening statements adds nothing
  const auto& fs_ = stmts.root().children;
  std::vector<const java::Node*> body_stmts;
  for (const auto& c : body->children) body_stmts.push_back(&c);
  if (fs_.size() <= body_stmts.size()) {
    bool same = true;
    for (std::size_t i = 0; i < fs_.size() && same; ++i)
      same = stmts.render(fs_[i]) == original.render(*body_stmts[i]);
    if (same) return generated;
  }

  std::string rest = src.substr(sig->body_open + 1);
  std::string indent = "    ";
  std::size_t nl = rest.find('\n');
  if (nl != std::string::npos) {
    std::size_t a = nl + 1, b = a;
    while (b < rest.size() && (rest[b] == ' ' || rest[b] == '\t')) ++b;
    if (b < rest.size() && rest[b] != '\n' && rest[b] != '\r' && rest[b] != '}') indent = rest.substr(a, b - a);
  }
  std::string reindented;
  for (std::size_t i = 0; i < fill.size(); ++i) {
    reindented.push_back(fill[i]);
    if (fill[i] == '\n' && i + 1 < fill.size()) reindented += indent;
  }
  CodeSnippet out = generated;
  out.source = src.substr(0, sig->body_open + 1) + "\n" + indent + reindented +
               (rest.empty() || rest.front() != '\n' ? "\n" : "") + rest;
  if (!java::parse_source(out.source).ok()) return generated;
  return out;
}

void to_json(json& j, const RunResult& r) {
  j = json{{"task_id", r.task_id},   {"method", to_string(r.method)},
           {"generated", r.generated.source}, {"raw", r.raw},
           {"compiled", r.compiled}, {"passed", r.passed},
           {"wall_ms", r.wall_ms}};
  j["error"] = r.error ? json(*r.error) : json(nullptr);
  if (r.decode_record) {
    j["decode"] = {{"steps", r.decode_record->steps},
                   {"stop_reason", decode::to_string(r.decode_record->stop_reason)},
                   {"interventions", r.decode_record->interventions.size()},
                   {"checker_calls", r.decode_record->checker_calls}};
  }
}

void from_json(const json& j, RunResult& r) {
  r.task_id = j.at("task_id").get<std::string>();
  r.method = method_from_string(j.at("method").get<std::string>());
  r.generated = {r.task_id, j.at("generated").get<std::string>(), Origin::Generated, "java"};
  r.raw = j.value("raw", std::string());
  r.compiled = j.at("compiled").get<bool>();
  r.passed = j.at("passed").get<bool>();
  r.wall_ms = j.at("wall_ms").get<std::uint64_t>();
  if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
  r.decode_record.reset();
}

decode::Mode mode_for(Method m) noexcept {
  switch (m) {
    case Method::RobgenNoChecker: return decode::Mode::NoChecker;
    case Method::Robgen: return decode::Mode::Full;
    default: return decode::Mode::Off;
  }
}

RunResult run_task(const TaskRecord& task, Method method, decode::TokenProvider& provider,
                   checker::Checker* checker, const RunConfig& cfg, Executor& executor,
                   const fs::path& task_dir) {
  RunResult r;
  r.task_id = task.task_id;
  r.method = method;
  r.generated = {task.task_id, "", Origin::Generated, "java"};
  using clock = std::chrono::steady_clock;
  clock::duration spent{};
  try {
    const std::string prompt =
        build_prompt(task, method == Method::Rp ? PromptVariant::RobustCoder : PromptVariant::Standard,
                     cfg.templates);
    decode::InterventionConfig dc = cfg.decode;
    dc.mode = mode_for(method);
    if (dc.mode != decode::Mode::Off && dc.if_token_ids.empty())
      dc.if_token_ids = decode::build_if_token_set(provider.vocabulary());
    auto t0 = clock::now();
    // the prompt asks for the whole method, so the output carries its own signature
    r.decode_record = decode::run_decode(provider, method == Method::Robgen ? checker : nullptr,
                                         {prompt, "", {}}, dc);
    spent += clock::now() - t0;
    r.raw = r.decode_record->text;
    r.generated = trim_output(r.raw, task.signature, task.task_id);
    if (method == Method::Pgi) {
      auto t1 = clock::now();
      r.generated = pgi_insert(r.generated, task, provider, cfg.pgi);
      spent += clock::now() - t1;
    }
  } catch (const Error& e) {
    r.wall_ms = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(spent).count());
    if (r.generated.source.empty()) r.generated.source = r.raw;
    r.error = e.what();
    return r;
  }
  r.wall_ms = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(spent).count());
  try {
    auto c = executor.compile(task, r.generated, task_dir);
    r.compiled = c.ok;
    if (!c.ok) r.error = "compile failed (exit " + std::to_string(c.exit_code) + ")";
    if (c.ok) {
      auto t = executor.test(task, r.generated, task_dir);
      r.passed = t.ok;
      if (!t.ok) r.error = "tests failed (exit " + std::to_string(t.exit_code) + ")";
    }
  } catch (const std::exception& e) {
    r.passed = false;
    r.error = std::string("executor: ") + e.what();
  }
  return r;
}

std::string format_delta(double base, double value) {
  if (!(base > 0.0)) throw Error(ErrorKind::InvalidArgument, "baseline time must be positive");
  double pct = (value - base) / base * 100.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.1f%%", pct);
  std::string s = buf;
  if (s == "-0.0%") s = "+0.0%";
  return s;
}

RuntimeTable runtime_report(const std::map<Method, std::vector<RunResult>>& results, std::size_t n_tasks) {
  auto g = results.find(Method::Greedy);
  if (g == results.end()) throw Error(ErrorKind::MismatchedTaskSets, "no greedy baseline");
  auto ids = [](const std::vector<RunResult>& rs) {
    std::set<std::string> s;
    for (const auto& r : rs) s.insert(r.task_id);
    return s;
  };
  const auto base_ids = ids(g->second);
  if (base_ids.size() != n_tasks || g->second.size() != n_tasks)
    throw Error(ErrorKind::MismatchedTaskSets, "greedy covers " + std::to_string(base_ids.size()) +
                                                   " tasks, expected " + std::to_string(n_tasks));
  auto minutes = [](const std::vector<RunResult>& rs) {
    std::uint64_t ms = 0;
    for (const auto& r : rs) ms += r.wall_ms;
    return static_cast<double>(ms) / 60000.0;
  };
  RuntimeTable t;
  const double base = minutes(g->second);
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %s\n", "method", "minutes");
  t.text = line;
  for (Method m : all_methods()) {
    auto it = results.find(m);
    if (it == results.end()) continue;
    if (ids(it->second) != base_ids || it->second.size() != n_tasks)
      throw Error(ErrorKind::MismatchedTaskSets,
                  std::string(to_string(m)) + " was run on a different task set than greedy");
    RuntimeRow row{m, minutes(it->second), std::nullopt};
    std::string cell;
    char num[64];
    std::snprintf(num, sizeof num, "%.2f", row.minutes);
    cell = num;
    if (m != Method::Greedy && base > 0.0) {
      row.delta = (row.minutes - base) / base;
      cell += "(" + format_delta(base, row.minutes) + ")";
    }
    std::snprintf(line, sizeof line, "%-20s %s\n", std::string(to_string(m)).c_str(), cell.c_str());
    t.text += line;
    t.rows.push_back(row);
  }
  return t;
}

std::string format_fraction(const Fraction& f) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%zu)", f.value(), f.count);
  return buf;
}

void to_json(json& j, const Report& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    json e = {{"method", to_string(m.method)},
              {"n_tasks", m.n_tasks},
              {"compile", fraction_json(m.compile)},
              {"pass", fraction_json(m.pass)},
              {"metrics",
               {{"snippets", m.metric_snippets},
                {"avg_abe_generated", m.avg_abe_generated},
                {"avg_abe_reference", m.avg_abe_reference},
                {"ehar_generated", m.ehar_generated},
                {"ehar_reference", m.ehar_reference}}},
              {"runtime_minutes", m.runtime_minutes}};
    e["runtime_delta"] = m.runtime_delta ? json(*m.runtime_delta) : json(nullptr);
    if (m.verdicts) {
      e["verdicts"] = {{"count", m.verdict_count},
                       {"generated_better", m.verdicts->generated_better},
                       {"tie", m.verdicts->tie},
                       {"human_better", m.verdicts->human_better}};
    } else {
      e["verdicts"] = nullptr;
    }
    methods.push_back(std::move(e));
  }
  j = json{{"profile", to_string(r.profile)}, {"n_tasks", r.n_tasks}, {"methods", methods}, {"notes", r.notes}};
}

void from_json(const json& j, Report& r) {
  r.profile = profile_from_string(j.at("profile").get<std::string>());
  r.n_tasks = j.at("n_tasks").get<std::size_t>();
  r.notes = j.value("notes", std::vector<std::string>{});
  r.methods.clear();
  for (const auto& e : j.at("methods")) {
    MethodReport m;
    m.method = method_from_string(e.at("method").get<std::string>());
    m.n_tasks = e.at("n_tasks").get<std::size_t>();
    m.compile = fraction_from(e.at("compile"));
    m.pass = fraction_from(e.at("pass"));
    const auto& mt = e.at("metrics");
    m.metric_snippets = mt.at("snippets").get<std::size_t>();
    m.avg_abe_generated = mt.at("avg_abe_generated").get<double>();
    m.avg_abe_reference = mt.at("avg_abe_reference").get<double>();
    m.ehar_generated = mt.at("ehar_generated").get<double>();
    m.ehar_reference = mt.at("ehar_reference").get<double>();
    m.runtime_minutes = e.at("runtime_minutes").get<double>();
    if (!e.at("runtime_delta").is_null()) m.runtime_delta = e["runtime_delta"].get<double>();
    if (!e.at("verdicts").is_null()) {
      const auto& v = e["verdicts"];
      m.verdict_count = v.at("count").get<std::size_t>();
      m.verdicts = judge::VerdictDistribution{v.at("generated_better").get<double>(), v.at("tie").get<double>(),
                                              v.at("human_better").get<double>()};
    }
    r.methods.push_back(m);
  }
}

std::string to_text(const Report& r) {
  std::string out = "profile: " + std::string(to_string(r.profile)) + ", tasks: " + std::to_string(r.n_tasks) + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-11s %-11s %-13s %-13s %-9s %-9s %-20s %s\n", "method", "Compile@1",
                "Pass@1", "AvgABE gen", "AvgABE ref", "EHAR gen", "EHAR ref", "verdicts gb/tie/hb", "minutes");
  out += line;
  for (const auto& m : r.methods) {
    std::string verdicts = "-";
    if (m.verdicts) {
      char v[64];
      std::snprintf(v, sizeof v, "%.3f/%.3f/%.3f", m.verdicts->generated_better, m.verdicts->tie,
                    m.verdicts->human_better);
      verdicts = v;
    }
    char rt[64];
    std::snprintf(rt, sizeof rt, "%.2f", m.runtime_minutes);
    std::string runtime = rt;
    if (m.runtime_delta) {
      char d[32];
      std::snprintf(d, sizeof d, "(%+.1f%%)", *m.runtime_delta * 100.0);
      runtime += std::string(d) == "(-0.0%)" ? "(+0.0%)" : d;
    }
    char a[32], b[32], c[32], d[32];
    std::snprintf(a, sizeof a, "%.3f", m.avg_abe_generated);
    std::snprintf(b, sizeof b, "%.3f", m.avg_abe_reference);
    std::snprintf(c, sizeof c, "%.3f", m.ehar_generated);
    std::snprintf(d, sizeof d, "%.3f", m.ehar_reference);
    std::snprintf(line, sizeof line, "%-18s %-11s %-11s %-13s %-13s %-9s %-9s %-20s %s\n",
                  std::string(to_string(m.method)).c_str(), format_fraction(m.compile).c_str(),
                  format_fraction(m.pass).c_str(), a, b, c, d, verdicts.c_str(), runtime.c_str());
    out += line;
  }
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

Report emit_report(const std::vector<TaskRecord>& tasks,
                   const std::map<Method, std::vector<RunResult>>& results,
                   const std::map<Method, std::vector<judge::JudgeVerdict>>& verdicts, Profile profile) {
  std::map<std::string, const TaskRecord*> by_id;
  for (const auto& t : tasks) by_id[t.task_id] = &t;
  Report rep;
  rep.profile = profile;
  rep.n_tasks = tasks.size();

  std::map<Method, std::set<std::string>> ids;
  for (const auto& [m, rs] : results) {
    auto& s = ids[m];
    for (const auto& r : rs) {
      if (!by_id.count(r.task_id))
        throw Error(ErrorKind::InconsistentInputs, std::string(to_string(m)) + " result for unknown task " + r.task_id);
      if (!s.insert(r.task_id).second)
        throw Error(ErrorKind::InconsistentInputs, std::string(to_string(m)) + " has two results for " + r.task_id);
      if (r.passed && !r.compiled)
        throw Error(ErrorKind::InconsistentInputs, r.task_id + " passed without compiling");
      if (r.method != m)
        throw Error(ErrorKind::InconsistentInputs, r.task_id + " filed under the wrong method");
    }
  }
  for (const auto& [m, vs] : verdicts) {
    for (const auto& v : vs) {
      if (!ids.count(m) || !ids[m].count(v.task_id))
        throw Error(ErrorKind::InconsistentInputs,
                    "verdict for " + v.task_id + " has no " + std::string(to_string(m)) + " result");
    }
  }

  auto total_minutes = [](const std::vector<RunResult>& rs) {
    std::uint64_t ms = 0;
    for (const auto& r : rs) ms += r.wall_ms;
    return static_cast<double>(ms) / 60000.0;
  };
  const auto greedy = results.find(Method::Greedy);
  for (Method m : all_methods()) {
    auto it = results.find(m);
    if (it == results.end()) continue;
    const auto& rs = it->second;
    if (rs.empty()) {
      rep.notes.push_back(std::string(to_string(m)) + " has no results and is omitted");
      continue;
    }
    MethodReport mr;
    mr.method = m;
    mr.n_tasks = rs.size();
    mr.compile.total = mr.pass.total = rs.size();
    std::size_t atoms_g = 0, atoms_r = 0, try_g = 0, try_r = 0;
    for (const auto& r : rs) {
      mr.compile.count += r.compiled;
      mr.pass.count += r.passed;
      if (profile == Profile::Empirical && !r.compiled) continue;
      auto g = snippet_metrics(r.generated.source);
      auto h = snippet_metrics(by_id[r.task_id]->reference.source);
      ++mr.metric_snippets;
      atoms_g += g.atoms;
      atoms_r += h.atoms;
      try_g += g.try_catch;
      try_r += h.try_catch;
    }
    if (mr.metric_snippets > 0) {
      const double n = static_cast<double>(mr.metric_snippets);
      mr.avg_abe_generated = static_cast<double>(atoms_g) / n;
      mr.avg_abe_reference = static_cast<double>(atoms_r) / n;
      mr.ehar_generated = static_cast<double>(try_g) / n;
      mr.ehar_reference = static_cast<double>(try_r) / n;
    } else {
      rep.notes.push_back(std::string(to_string(m)) + " has no snippets for the code metrics");
    }
    if (auto v = verdicts.find(m); v != verdicts.end() && !v->second.empty()) {
      std::vector<judge::Verdict> labels;
      for (const auto& x : v->second) labels.push_back(x.verdict);
      mr.verdicts = judge::verdict_distribution(labels);
      mr.verdict_count = labels.size();
    }
    mr.runtime_minutes = total_minutes(rs);
    if (m != Method::Greedy && greedy != results.end() && ids[m] == ids[Method::Greedy]) {
      double base = total_minutes(greedy->second);
      if (base > 0.0) mr.runtime_delta = (mr.runtime_minutes - base) / base;
    }
    rep.methods.push_back(mr);
  }
  return rep;
}

std::map<Method, std::vector<RunResult>> run_bench(const std::vector<TaskRecord>& tasks,
                                                   const ProviderFactory& providers,
                                                   const CheckerFactory& checkers, Executor& executor,
                                                   const BenchOptions& options, const fs::path& run_dir) {
  const std::size_t repeats = std::max<std::size_t>(1, options.repeats);
  std::map<Method, std::vector<RunResult>> out;
  for (Method m : options.methods) {
    std::vector<RunResult> rs(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
        const auto& task = tasks[i];
        auto dir = run_dir / "tasks" / std::string(to_string(m)) / file_safe(task.task_id);
        std::uint64_t total_ms = 0;
        for (std::size_t k = 0; k < repeats; ++k) {
          auto provider = providers(task);
          std::unique_ptr<checker::Checker> chk;
          if (m == Method::Robgen && checkers) chk = checkers(task);
          RunResult r = run_task(task, m, *provider, chk.get(), options.run, executor, dir);
          total_ms += r.wall_ms;
          if (k == 0) rs[i] = std::move(r);
        }
        rs[i].wall_ms = total_ms / repeats;
      }
    };
    // timing runs stay serial
    std::size_t jobs = repeats > 1 ? 1 : std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(1, tasks.size()));
    if (jobs == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    out[m] = std::move(rs);
  }
  return out;
}

fs::path new_run_dir(const fs::path& root) {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::localtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  fs::path dir = root / "runs" / stamp;
  for (int k = 1; fs::exists(dir); ++k) dir = root / "runs" / (std::string(stamp) + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

void write_run(const fs::path& run_dir, const std::map<Method, std::vector<RunResult>>& results,
               const Report& report) {
  fs::create_directories(run_dir / "records");
  fs::create_directories(run_dir / "transcripts");
  std::vector<json> rows;
  for (const auto& [m, rs] : results) {
    for (const auto& r : rs) {
      rows.push_back(json(r));
      if (r.decode_record) {
        auto dir = run_dir / "records" / std::string(to_string(m));
        fs::create_directories(dir);
        io::write_file(dir / (file_safe(r.task_id) + ".json"), json(*r.decode_record).dump(2) + "\n");
      }
    }
  }
  io::write_jsonl(run_dir / "results.jsonl", rows);
  io::write_file(run_dir / "report.json", json(report).dump(2) + "\n");
  io::write_file(run_dir / "report.txt", to_text(report));
}

}  // namespace robgen::bench
