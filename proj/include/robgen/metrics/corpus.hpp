#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "robgen/metrics/atoms.hpp"
#include "robgen/snippet.hpp"

namespace robgen::metrics {

struct SnippetMetrics {
  std::string id;
  std::size_t atom_count = 0;
  bool has_try_catch = false;
};

struct ExcludedSnippet {
  std::string id;
  std::string reason;
};

struct CorpusMetrics {
  std::size_t n_snippets = 0;
  double avg_abe = 0.0;
  double ehar = 0.0;
  std::vector<SnippetMetrics> per_snippet;  // input order
  std::vector<ExcludedSnippet> excluded;    // unparseable inputs, input order
  std::size_t skipped_conditions = 0;
};

struct CorpusOptions {
  ExceptionHandlingOptions exception_handling;
  std::size_t jobs = 1;
};

// Aggregates already-computed per-snippet rows. Throws EmptyCorpus.
CorpusMetrics aggregate(std::vector<SnippetMetrics> rows);

// Parses every snippet, excludes the unparseable ones (listed in
// `excluded`) and aggregates the rest. Throws EmptyCorpus when nothing
// parses.
CorpusMetrics corpus_metrics(const std::vector<CodeSnippet>& snippets, CorpusOptions options = {});

void to_json(nlohmann::json& j, const CorpusMetrics& m);
void from_json(const nlohmann::json& j, CorpusMetrics& m);

// "id,atom_count,has_try_catch" with a header row.
std::string to_csv(const CorpusMetrics& m);

// A directory of .java files (id = file stem) or a JSONL corpus.
std::vector<CodeSnippet> load_corpus(const std::string& path);

}  // namespace robgen::metrics
