#include "robgen/metrics/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include "robgen/error.hpp"
#include "robgen/io.hpp"

namespace robgen::metrics {

namespace {

struct Row {
  std::optional<SnippetMetrics> metrics;
  std::string failure;
  std::size_t skipped = 0;
};

Row evaluate_one(const CodeSnippet& s, const CorpusOptions& options) {
  Row row;
  try {
    java::SyntaxTree tree = parse_snippet(s.source);
    if (!tree.ok()) {
      const auto& e = tree.errors().front();
      row.failure = "parse error at " + std::to_string(e.line) + ":" + std::to_string(e.column) +
                    ": " + e.message;
      return row;
    }
    AtomSet atoms = extract_atoms(tree, s.id);
    row.skipped = atoms.skipped_conditions;
    row.metrics = SnippetMetrics{s.id, atoms.count,
                                 has_exception_handling(tree, options.exception_handling)};
  } catch (const Error& e) {
    row.failure = e.what();
  }
  return row;
}

}  // namespace

CorpusMetrics aggregate(std::vector<SnippetMetrics> rows) {
  if (rows.empty()) throw Error(ErrorKind::EmptyCorpus, "no parseable snippets");
  CorpusMetrics m;
  m.n_snippets = rows.size();
  std::size_t atoms = 0, with_try = 0;
  for (const auto& r : rows) {
    atoms += r.atom_count;
    if (r.has_try_catch) ++with_try;
  }
  m.avg_abe = static_cast<double>(atoms) / static_cast<double>(m.n_snippets);
  m.ehar = static_cast<double>(with_try) / static_cast<double>(m.n_snippets);
  m.per_snippet = std::move(rows);
  return m;
}

CorpusMetrics corpus_metrics(const std::vector<CodeSnippet>& snippets, CorpusOptions options) {
  if (snippets.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus is empty");
  std::vector<Row> rows(snippets.size());
  std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, snippets.size());
  if (jobs == 1) {
    for (std::size_t i = 0; i < snippets.size(); ++i) rows[i] = evaluate_one(snippets[i], options);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < snippets.size();)
          rows[i] = evaluate_one(snippets[i], options);
      });
    for (auto& t : pool) t.join();
  }

  std::vector<SnippetMetrics> ok;
  std::vector<ExcludedSnippet> excluded;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].metrics) {
      ok.push_back(*rows[i].metrics);
      skipped += rows[i].skipped;
    } else {
      excluded.push_back({snippets[i].id, rows[i].failure});
    }
  }
  if (ok.empty())
    throw Error(ErrorKind::EmptyCorpus,
                "none of " + std::to_string(snippets.size()) + " snippets parsed");
  CorpusMetrics m = aggregate(std::move(ok));
  m.excluded = std::move(excluded);
  m.skipped_conditions = skipped;
  return m;
}

void to_json(nlohmann::json& j, const CorpusMetrics& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m.per_snippet)
    rows.push_back({{"snippet_id", r.id}, {"atom_count", r.atom_count}, {"has_try_catch", r.has_try_catch}});
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : m.excluded) excluded.push_back({{"snippet_id", e.id}, {"reason", e.reason}});
  j = {{"n_snippets", m.n_snippets},
       {"avg_abe", m.avg_abe},
       {"ehar", m.ehar},
       {"per_snippet", rows},
       {"diagnostics", {{"excluded", excluded}, {"skipped_conditions", m.skipped_conditions}}}};
}

void from_json(const nlohmann::json& j, CorpusMetrics& m) {
  m = CorpusMetrics{};
  j.at("n_snippets").get_to(m.n_snippets);
  j.at("avg_abe").get_to(m.avg_abe);
  j.at("ehar").get_to(m.ehar);
  for (const auto& r : j.at("per_snippet"))
    m.per_snippet.push_back({r.at("snippet_id").get<std::string>(), r.at("atom_count").get<std::size_t>(),
                             r.at("has_try_catch").get<bool>()});
  if (auto d = j.find("diagnostics"); d != j.end()) {
    for (const auto& e : d->value("excluded", nlohmann::json::array()))
      m.excluded.push_back({e.at("snippet_id").get<std::string>(), e.value("reason", "")});
    m.skipped_conditions = d->value("skipped_conditions", std::size_t{0});
  }
}

std::string to_csv(const CorpusMetrics& m) {
  std::ostringstream out;
  out << "id,atom_count,has_try_catch\n";
  for (const auto& r : m.per_snippet) {
    std::string id = r.id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : id) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = q + "\"";
    }
    out << id << ',' << r.atom_count << ',' << (r.has_try_catch ? "true" : "false") << '\n';
  }
  return out.str();
}

std::vector<CodeSnippet> load_corpus(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (!fs::exists(p)) throw Error(ErrorKind::Io, "no such file or directory: " + path);
  std::vector<CodeSnippet> out;
  if (fs::is_directory(p) || p.extension() == ".java") {
    for (const auto& f : io::list_files(p, ".java"))
      out.push_back({f.stem().string(), io::read_file(f), Origin::Generated, "java"});
    return out;
  }
  std::size_t n = 0;
  for (const auto& row : io::read_jsonl(p)) {
    ++n;
    try {
      out.push_back(row.get<CodeSnippet>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, path + ": record " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace robgen::metrics
