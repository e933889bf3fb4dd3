#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robgen/snippet.hpp"

namespace robgen::judge {

enum class Assignment { GenIsA, GenIsB };
enum class Verdict { GeneratedBetter, Tie, HumanBetter };

std::string_view to_string(Assignment a) noexcept;
std::string_view to_string(Verdict v) noexcept;
Assignment assignment_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

std::uint64_t fnv1a64(std::string_view data) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Low bit of splitmix64(fnv1a64(task_id) ^ seed): 0 puts the generated code in slot A.
Assignment assign(std::string_view task_id, std::uint64_t seed) noexcept;

struct JudgeTask {
  std::string task_id;
  CodeSnippet generated;
  CodeSnippet reference;
  Assignment assignment = Assignment::GenIsA;
  std::uint64_t seed = 0;
};

JudgeTask make_task(std::string task_id, CodeSnippet generated, CodeSnippet reference,
                    std::uint64_t seed);

// Placeholders: {code_a}, {code_b} (required) and {language} (optional).
struct JudgeTemplate {
  std::string text;

  static JudgeTemplate default_template();
  static JudgeTemplate load(const std::filesystem::path& path);
};

std::string build_judge_prompt(const JudgeTask& task, const JudgeTemplate& tmpl);

// Last "SCORE: n" in a response; nullopt when absent, out of [1,5], or
// fractional while fractions are not allowed.
std::optional<double> parse_score(std::string_view response, bool allow_fractional = false);

Verdict map_verdict(double avg, Assignment assignment, double tie_epsilon = 0.0);

struct JudgeVerdict {
  std::string task_id;
  Assignment assignment = Assignment::GenIsA;
  std::vector<double> raw_scores;
  double avg = 0.0;
  Verdict verdict = Verdict::Tie;
};

void to_json(nlohmann::json& j, const JudgeVerdict& v);
void from_json(const nlohmann::json& j, JudgeVerdict& v);

// A chat endpoint. complete() throws TransportError when no reply arrives.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

struct ChatConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  double temperature = 0.0;
  int timeout_ms = 60000;
  std::string api_key;  // from ROBGEN_JUDGE_API_KEY unless set

  static ChatConfig from_json(const nlohmann::json& j);
};

// OpenAI-style chat completions over HTTP(S). One connection per call so a
// single instance can serve several worker threads.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  ChatConfig config_;
};

struct TranscriptEntry {
  int call = 0;     // 0-based repeat
  int attempt = 0;  // 0-based try within the repeat
  std::string prompt;
  std::optional<std::string> response;
  std::optional<std::string> error;
  std::optional<double> score;
};

void to_json(nlohmann::json& j, const TranscriptEntry& e);

struct JudgeOptions {
  int repeats = 3;
  double tie_epsilon = 0.0;
  int transport_retries = 2;
  int backoff_ms = 500;  // doubled after each transport failure
  bool allow_fractional = false;
  std::size_t parallelism = 4;
  JudgeTemplate tmpl = JudgeTemplate::default_template();
};

// Repeats run one after another. An unparseable reply gets one fresh call;
// a second one fails the task with UnparseableScore.
JudgeVerdict evaluate_pair(const JudgeTask& task, ChatClient& client, const JudgeOptions& options,
                           std::vector<TranscriptEntry>* transcript = nullptr);

struct JudgeFailure {
  std::string task_id;
  std::string error;
};

struct JudgeRun {
  std::vector<JudgeVerdict> verdicts;  // input order, failed tasks left out
  std::vector<JudgeFailure> failures;
};

// Evaluates tasks on a bounded pool. With run_dir set, writes verdicts.json
// and transcripts/<task_id>.json there.
JudgeRun run_judge(const std::vector<JudgeTask>& tasks, ChatClient& client,
                   const JudgeOptions& options,
                   const std::optional<std::filesystem::path>& run_dir = std::nullopt);

struct VerdictDistribution {
  double generated_better = 0.0;
  double tie = 0.0;
  double human_better = 0.0;
};

VerdictDistribution verdict_distribution(const std::vector<Verdict>& verdicts);

// Cohen's kappa between judge and human labels. Throws LengthMismatch, and
// DegenerateAgreement when expected agreement is 1.
double kappa_validate(const std::vector<Verdict>& llm, const std::vector<Verdict>& human);

}  // namespace robgen::judge
