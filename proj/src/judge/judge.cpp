#include "robgen/judge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <regex>
#include <thread>

#include "httplib.h"
#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/log.hpp"
#include "robgen/stats/stats.hpp"

namespace robgen::judge {

using nlohmann::json;

namespace {

constexpr const char* kDefaultTemplate =
    R"(You are reviewing two {language} implementations of the same method for robustness.
Judge them by defensive programming principles: boundary checking, exception handling,
and input validation. Ignore style, naming and performance.

Code A:
```{language}
{code_a}
```

Code B:
```{language}
{code_b}
```

Rate how robust Code A is compared with Code B on a 1-5 scale:
1 = Code A is much less robust, 2 = somewhat less robust, 3 = comparable,
4 = somewhat more robust, 5 = much more robust.
Explain briefly, then end with a final line of the form
SCORE: <integer 1-5>
)";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t at = 0;
  while ((at = s.find(from, at)) != std::string::npos) {
    s.replace(at, from.size(), to);
    at += to.size();
  }
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

// Task ids end up as file names.
std::string file_safe(std::string_view id) {
  std::string out;
  for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  return out.empty() ? "_" : out;
}

}  // namespace

std::string_view to_string(Assignment a) noexcept {
  return a == Assignment::GenIsA ? "gen_is_A" : "gen_is_B";
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::GeneratedBetter: return "generated_better";
    case Verdict::Tie: return "tie";
    case Verdict::HumanBetter: return "human_better";
  }
  return "tie";
}

Assignment assignment_from_string(std::string_view s) {
  if (s == "gen_is_A") return Assignment::GenIsA;
  if (s == "gen_is_B") return Assignment::GenIsB;
  throw Error(ErrorKind::Format, "unknown assignment '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "generated_better") return Verdict::GeneratedBetter;
  if (s == "tie") return Verdict::Tie;
  if (s == "human_better") return Verdict::HumanBetter;
  throw Error(ErrorKind::Format, "unknown verdict '" + std::string(s) + "'");
}

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Assignment assign(std::string_view task_id, std::uint64_t seed) noexcept {
  return (splitmix64(fnv1a64(task_id) ^ seed) & 1u) == 0 ? Assignment::GenIsA
                                                          : Assignment::GenIsB;
}

JudgeTask make_task(std::string task_id, CodeSnippet generated, CodeSnippet reference,
                    std::uint64_t seed) {
  JudgeTask t;
  t.assignment = assign(task_id, seed);
  t.task_id = std::move(task_id);
  t.generated = std::move(generated);
  t.reference = std::move(reference);
  t.seed = seed;
  return t;
}

JudgeTemplate JudgeTemplate::default_template() { return {kDefaultTemplate}; }

JudgeTemplate JudgeTemplate::load(const std::filesystem::path& path) {
  return {io::read_file(path)};
}

std::string build_judge_prompt(const JudgeTask& task, const JudgeTemplate& tmpl) {
  for (std::string_view ph : {"{code_a}", "{code_b}"})
    if (tmpl.text.find(ph) == std::string::npos)
      throw Error(ErrorKind::TemplateMissing, "judge template lacks " + std::string(ph));
  if (blank(task.generated.source) || blank(task.reference.source))
    throw Error(ErrorKind::InvalidArgument, "task '" + task.task_id + "' has an empty snippet");
  const bool gen_a = task.assignment == Assignment::GenIsA;
  const std::string& a = gen_a ? task.generated.source : task.reference.source;
  const std::string& b = gen_a ? task.reference.source : task.generated.source;
  // fill code slots last so snippet text is never scanned for placeholders
  std::string out = tmpl.text;
  replace_all(out, "{language}", task.generated.language);
  std::string result;
  std::size_t at = 0;
  for (;;) {
    std::size_t pa = out.find("{code_a}", at);
    std::size_t pb = out.find("{code_b}", at);
    std::size_t p = std::min(pa, pb);
    if (p == std::string::npos) break;
    result.append(out, at, p - at);
    result += p == pa ? a : b;
    at = p + 8;
  }
  result.append(out, at, std::string::npos);
  return result;
}

std::optional<double> parse_score(std::string_view response, bool allow_fractional) {
  static const std::regex re(R"(SCORE:\s*\**\s*([0-9]+(?:\.[0-9]+)?))", std::regex::icase);
  std::optional<std::string> last;
  std::string text(response);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
       ++it)
    last = (*it)[1].str();
  if (!last) return std::nullopt;
  if (!allow_fractional && last->find('.') != std::string::npos) return std::nullopt;
  double v = std::strtod(last->c_str(), nullptr);
  if (!(v >= 1.0 && v <= 5.0)) return std::nullopt;
  return v;
}

Verdict map_verdict(double avg, Assignment assignment, double tie_epsilon) {
  Verdict for_a;
  if (avg > 3.0 + tie_epsilon) {
    for_a = Verdict::GeneratedBetter;  // A more robust
  } else if (avg < 3.0 - tie_epsilon) {
    for_a = Verdict::HumanBetter;  // A less robust
  } else {
    return Verdict::Tie;
  }
  if (assignment == Assignment::GenIsA) return for_a;
  return for_a == Verdict::GeneratedBetter ? Verdict::HumanBetter : Verdict::GeneratedBetter;
}

void to_json(json& j, const JudgeVerdict& v) {
  j = json{{"task_id", v.task_id},       {"assignment", to_string(v.assignment)},
           {"raw_scores", v.raw_scores}, {"avg", v.avg},
           {"verdict", to_string(v.verdict)}};
}

void from_json(const json& j, JudgeVerdict& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.assignment = assignment_from_string(j.at("assignment").get<std::string>());
  v.raw_scores = j.at("raw_scores").get<std::vector<double>>();
  v.avg = j.at("avg").get<double>();
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
}

ChatConfig ChatConfig::from_json(const json& j) {
  ChatConfig c;
  c.base_url = j.value("base_url", c.base_url);
  c.path = j.value("path", c.path);
  c.model = j.value("model", c.model);
  c.temperature = j.value("temperature", c.temperature);
  c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
  return c;
}

HttpChatClient::HttpChatClient(ChatConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty()) {
    if (const char* k = std::getenv("ROBGEN_JUDGE_API_KEY")) config_.api_key = k;
  }
  if (config_.base_url.empty()) throw Error(ErrorKind::InvalidArgument, "judge base_url is empty");
}

std::string HttpChatClient::complete(const std::string& prompt) {
  httplib::Client cli(config_.base_url);
  auto ms = std::chrono::milliseconds(std::max(1, config_.timeout_ms));
  cli.set_connection_timeout(ms);
  cli.set_read_timeout(ms);
  cli.set_write_timeout(ms);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  json body = {{"model", config_.model},
               {"temperature", config_.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  auto res = cli.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorKind::TransportError, httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorKind::TransportError, "HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body).at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::TransportError, std::string("unexpected reply: ") + e.what());
  }
}

void to_json(json& j, const TranscriptEntry& e) {
  j = json{{"call", e.call}, {"attempt", e.attempt}, {"prompt", e.prompt}};
  j["response"] = e.response ? json(*e.response) : json(nullptr);
  j["error"] = e.error ? json(*e.error) : json(nullptr);
  j["score"] = e.score ? json(*e.score) : json(nullptr);
}

JudgeVerdict evaluate_pair(const JudgeTask& task, ChatClient& client, const JudgeOptions& options,
                           std::vector<TranscriptEntry>* transcript) {
  if (options.repeats < 1) throw Error(ErrorKind::InvalidArgument, "repeats must be >= 1");
  const std::string prompt = build_judge_prompt(task, options.tmpl);
  JudgeVerdict v;
  v.task_id = task.task_id;
  v.assignment = task.assignment;

  // one reply, retrying transport failures with backoff
  auto ask = [&](int call, int& attempt) -> std::string {
    int backoff = options.backoff_ms;
    for (int t = 0;; ++t) {
      TranscriptEntry e{call, attempt++, prompt, std::nullopt, std::nullopt, std::nullopt};
      try {
        std::string reply = client.complete(prompt);
        e.response = reply;
        e.score = parse_score(reply, options.allow_fractional);
        if (transcript) transcript->push_back(e);
        return reply;
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::TransportError) throw;
        e.error = err.what();
        if (transcript) transcript->push_back(e);
        if (t >= options.transport_retries) throw;
        log::warn(std::string(err.what()) + "; retrying judge call for " + task.task_id);
        if (backoff > 0) std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
    }
  };

  for (int call = 0; call < options.repeats; ++call) {
    int attempt = 0;
    std::optional<double> score;
    std::string reply;
    for (int round = 0; round < 2 && !score; ++round) {
      reply = ask(call, attempt);
      score = parse_score(reply, options.allow_fractional);
    }
    if (!score) {
      std::string tail = reply.size() > 80 ? reply.substr(reply.size() - 80) : reply;
      throw Error(ErrorKind::UnparseableScore,
                  "task '" + task.task_id + "' call " + std::to_string(call + 1) +
                      ": no SCORE line in reply ending \"" + tail + "\"");
    }
    v.raw_scores.push_back(*score);
  }
  double sum = 0.0;
  for (double s : v.raw_scores) sum += s;
  v.avg = sum / static_cast<double>(v.raw_scores.size());
  v.verdict = map_verdict(v.avg, v.assignment, options.tie_epsilon);
  return v;
}

JudgeRun run_judge(const std::vector<JudgeTask>& tasks, ChatClient& client,
                   const JudgeOptions& options, const std::optional<std::filesystem::path>& run_dir) {
  struct Slot {
    std::optional<JudgeVerdict> verdict;
    std::optional<std::string> error;
    std::vector<TranscriptEntry> transcript;
  };
  std::vector<Slot> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        slots[i].verdict = evaluate_pair(tasks[i], client, options, &slots[i].transcript);
      } catch (const Error& e) {
        slots[i].error = e.what();
      }
    }
  };
  std::size_t workers = std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(1, tasks.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  JudgeRun run;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (slots[i].verdict) {
      run.verdicts.push_back(std::move(*slots[i].verdict));
    } else {
      log::warn("judge task " + tasks[i].task_id + " failed: " + *slots[i].error);
      run.failures.push_back({tasks[i].task_id, *slots[i].error});
    }
  }
  if (run_dir) {
    std::filesystem::create_directories(*run_dir / "transcripts");
    json failures = json::array();
    for (const auto& f : run.failures) failures.push_back({{"task_id", f.task_id}, {"error", f.error}});
    io::write_file(*run_dir / "verdicts.json",
                   json{{"verdicts", run.verdicts}, {"failures", failures}}.dump(2) + "\n");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      json t = {{"task_id", tasks[i].task_id},
                {"assignment", to_string(tasks[i].assignment)},
                {"seed", tasks[i].seed},
                {"entries", slots[i].transcript}};
      io::write_file(*run_dir / "transcripts" / (file_safe(tasks[i].task_id) + ".json"), t.dump(2) + "\n");
    }
  }
  return run;
}

VerdictDistribution verdict_distribution(const std::vector<Verdict>& verdicts) {
  if (verdicts.empty()) throw Error(ErrorKind::EmptyInput, "no verdicts");
  std::size_t c[3] = {0, 0, 0};
  for (Verdict v : verdicts) ++c[static_cast<int>(v)];
  const double n = static_cast<double>(verdicts.size());
  return {c[0] / n, c[1] / n, c[2] / n};
}

double kappa_validate(const std::vector<Verdict>& llm, const std::vector<Verdict>& human) {
  if (llm.size() != human.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(llm.size()) + " judge labels vs " +
                                               std::to_string(human.size()) + " human labels");
  if (llm.empty()) throw Error(ErrorKind::EmptyInput, "no labels");
  std::vector<std::vector<std::uint64_t>> m(3, std::vector<std::uint64_t>(3, 0));
  for (std::size_t i = 0; i < llm.size(); ++i) ++m[static_cast<int>(llm[i])][static_cast<int>(human[i])];
  auto k = stats::cohen_kappa(m);
  if (k.degenerate)
    throw Error(ErrorKind::DegenerateAgreement, "expected agreement is 1; kappa undefined");
  return k.kappa;
}

}  // namespace robgen::judge
