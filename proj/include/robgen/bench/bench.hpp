#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robgen/checker/checker.hpp"
#include "robgen/decode/engine.hpp"
#include "robgen/judge/judge.hpp"
#include "robgen/snippet.hpp"

namespace robgen::bench {

struct TaskRecord {
  std::string task_id;
  std::string docstring;
  std::string signature;
  std::string context;  // surrounding repository code, may be empty
  CodeSnippet reference;
  std::optional<std::string> test_command;
};

void to_json(nlohmann::json& j, const TaskRecord& t);
void from_json(const nlohmann::json& j, TaskRecord& t);

// JSONL of {"task_id","docstring","signature","context","reference","test_command"?}.
// Rejects empty signatures, unparseable references and duplicate ids (Format).
std::vector<TaskRecord> load_tasks(const std::filesystem::path& path);

enum class Method { Greedy, Rp, Pgi, RobgenNoChecker, Robgen };
std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view s);
const std::vector<Method>& all_methods();

enum class Profile { Empirical, Eval };
std::string_view to_string(Profile p) noexcept;
Profile profile_from_string(std::string_view s);
// 300 for the empirical study, 1024 for the evaluation runs.
std::size_t default_max_tokens(Profile p) noexcept;

enum class PromptVariant { Standard, RobustCoder };

// Placeholders: {description}, {signature} (required), {context},
// {requirements} (required for the robust variant), {language}.
struct PromptTemplates {
  std::string standard;
  std::string requirements;  // block substituted for {requirements} in the robust variant

  static PromptTemplates defaults();
};

std::string build_prompt(const TaskRecord& task, PromptVariant variant,
                         const PromptTemplates& templates = PromptTemplates::defaults());

// Cuts one method out of raw model output: from the first occurrence of the
// signature (compared token by token) to its balanced closing brace, else the
// first method header found. Throws Untrimmable.
CodeSnippet trim_output(std::string_view raw, std::string_view signature, std::string id = "");

struct ExecResult {
  bool ok = false;
  int exit_code = 0;
  std::string log;
};

class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecResult compile(const TaskRecord& task, const CodeSnippet& code,
                             const std::filesystem::path& task_dir) = 0;
  virtual ExecResult test(const TaskRecord& task, const CodeSnippet& code,
                          const std::filesystem::path& task_dir) = 0;
};

class StubExecutor final : public Executor {
 public:
  StubExecutor(bool compiles = true, bool passes = false) : compiles_(compiles), passes_(passes) {}
  ExecResult compile(const TaskRecord&, const CodeSnippet&, const std::filesystem::path&) override;
  ExecResult test(const TaskRecord&, const CodeSnippet&, const std::filesystem::path&) override;

 private:
  bool compiles_;
  bool passes_;
};

// Compile = parses without syntax errors; test = never passes. Stands in for
// a Java toolchain, so undefined names are not caught.
class ParseExecutor final : public Executor {
 public:
  ExecResult compile(const TaskRecord&, const CodeSnippet& code, const std::filesystem::path&) override;
  ExecResult test(const TaskRecord&, const CodeSnippet&, const std::filesystem::path&) override;
};

// Shell commands with {task_dir} and {task_id} substituted. The snippet is
// written to <task_dir>/Generated.java and the task to <task_dir>/task.json
// first. Exit code 0 means success. An empty test command falls back to the
// task's own test_command; with neither, tests fail.
class CommandExecutor final : public Executor {
 public:
  CommandExecutor(std::string compile_cmd, std::string test_cmd);
  ExecResult compile(const TaskRecord& task, const CodeSnippet& code,
                     const std::filesystem::path& task_dir) override;
  ExecResult test(const TaskRecord& task, const CodeSnippet& code,
                  const std::filesystem::path& task_dir) override;

 private:
  std::string compile_cmd_;
  std::string test_cmd_;
};

ExecResult run_command(const std::string& command);
std::string substitute(std::string command, const TaskRecord& task,
                       const std::filesystem::path& task_dir);

struct FimTokens {
  std::string prefix = "<fim_prefix>";
  std::string suffix = "<fim_suffix>";
  std::string middle = "<fim_middle>";
};

struct PgiOptions {
  FimTokens fim;
  std::size_t max_tokens = 128;
};

std::string build_fim_prompt(const CodeSnippet& generated, const FimTokens& fim);

// Asks the provider to fill a hole at the first body line. The fill is kept
// only if it parses as statements starting with an if, does not repeat the
// body's own opening statements, and the result still parses.
CodeSnippet pgi_insert(const CodeSnippet& generated, const TaskRecord& task,
                       decode::TokenProvider& provider, const PgiOptions& options = {});

struct RunResult {
  std::string task_id;
  Method method = Method::Greedy;
  CodeSnippet generated;
  std::string raw;  // untrimmed model text
  bool compiled = false;
  bool passed = false;
  std::uint64_t wall_ms = 0;
  std::optional<decode::DecodeRecord> decode_record;
  std::optional<std::string> error;
};

void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);  // decode_record is not read back

struct RunConfig {
  decode::InterventionConfig decode;  // mode is set from the method
  PromptTemplates templates = PromptTemplates::defaults();
  PgiOptions pgi;
};

decode::Mode mode_for(Method m) noexcept;

// decode -> trim -> compile -> test. wall_ms covers generation only (the
// decode, plus the fill for pgi). Executor and trimming failures are recorded
// in the result, never thrown.
RunResult run_task(const TaskRecord& task, Method method, decode::TokenProvider& provider,
                   checker::Checker* checker, const RunConfig& cfg, Executor& executor,
                   const std::filesystem::path& task_dir);

struct RuntimeRow {
  Method method = Method::Greedy;
  double minutes = 0.0;
  std::optional<double> delta;  // fraction vs greedy; none for greedy itself
};

std::string format_delta(double base, double value);  // "+33.4%"

struct RuntimeTable {
  std::vector<RuntimeRow> rows;
  std::string text;
};

// Total generation minutes per method. Every method must cover the same
// task ids, greedy included (MismatchedTaskSets).
RuntimeTable runtime_report(const std::map<Method, std::vector<RunResult>>& results,
                            std::size_t n_tasks);

struct Fraction {
  std::size_t count = 0;
  std::size_t total = 0;
  double value() const { return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total); }
};

std::string format_fraction(const Fraction& f);  // "0.34 (79)"

struct MethodReport {
  Method method = Method::Greedy;
  std::size_t n_tasks = 0;
  Fraction compile;
  Fraction pass;
  std::size_t metric_snippets = 0;  // snippets the metrics below cover
  double avg_abe_generated = 0.0;
  double avg_abe_reference = 0.0;
  double ehar_generated = 0.0;
  double ehar_reference = 0.0;
  std::optional<judge::VerdictDistribution> verdicts;
  std::size_t verdict_count = 0;
  double runtime_minutes = 0.0;
  std::optional<double> runtime_delta;
};

struct Report {
  Profile profile = Profile::Eval;
  std::size_t n_tasks = 0;
  std::vector<MethodReport> methods;
  std::vector<std::string> notes;
};

void to_json(nlohmann::json& j, const Report& r);
void from_json(const nlohmann::json& j, Report& r);
std::string to_text(const Report& r);

// Counts come straight from the results; fractions, metrics and deltas are
// derived from them. In the empirical profile metrics cover compiled
// snippets only (and their references); in eval they cover every task.
// Throws InconsistentInputs for unknown or duplicate task ids, passed without
// compiled, or verdicts for tasks that have no result.
Report emit_report(const std::vector<TaskRecord>& tasks,
                   const std::map<Method, std::vector<RunResult>>& results,
                   const std::map<Method, std::vector<judge::JudgeVerdict>>& verdicts,
                   Profile profile);

using ProviderFactory = std::function<std::unique_ptr<decode::TokenProvider>(const TaskRecord&)>;
using CheckerFactory = std::function<std::unique_ptr<checker::Checker>(const TaskRecord&)>;

struct BenchOptions {
  std::vector<Method> methods{Method::Greedy};
  RunConfig run;
  Profile profile = Profile::Eval;
  std::size_t repeats = 1;  // > 1 averages wall time; forces serial execution
  std::size_t jobs = 1;
};

// Runs every task under every method. With repeats > 1 each run is repeated,
// wall_ms averaged and the first run's outputs kept.
std::map<Method, std::vector<RunResult>> run_bench(const std::vector<TaskRecord>& tasks,
                                                   const ProviderFactory& providers,
                                                   const CheckerFactory& checkers,
                                                   Executor& executor, const BenchOptions& options,
                                                   const std::filesystem::path& run_dir);

// runs/<timestamp>/ under root, created.
std::filesystem::path new_run_dir(const std::filesystem::path& root);

// results.jsonl, report.json, report.txt and records/<method>/<task>.json.
void write_run(const std::filesystem::path& run_dir,
               const std::map<Method, std::vector<RunResult>>& results, const Report& report);

}  // namespace robgen::bench
