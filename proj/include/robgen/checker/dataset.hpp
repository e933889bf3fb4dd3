#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace robgen::checker {

struct CheckerSample {
  std::string prefix;  // method signature through the end of a line
  bool label = false;  // next line starts with `if`
  std::string repo;
  std::string method_id;  // <path>#<name>:<line>
  std::string next_line;  // kept for auditing, not serialized
};

void to_json(nlohmann::json& j, const CheckerSample& s);
void from_json(const nlohmann::json& j, CheckerSample& s);

struct SourceFile {
  std::string repo;
  std::string path;  // relative to the repo root
  std::string text;
};

// Every .java file under root, with the repo named after the directory.
std::vector<SourceFile> load_repo(const std::filesystem::path& root);

struct DatasetOptions {
  bool else_if_positive = false;  // count `else if` lines as positive
  std::size_t jobs = 1;
};

struct EnumerationStats {
  std::size_t files = 0;
  std::size_t methods = 0;
  std::size_t skipped_methods = 0;  // methods containing syntax errors
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// All (prefix, label) pairs of the parseable methods, in file then source
// order. Blank and comment-only next lines yield no sample.
std::vector<CheckerSample> enumerate_samples(const SourceFile& file, const DatasetOptions& options = {},
                                             EnumerationStats* stats = nullptr);
std::vector<CheckerSample> enumerate_samples(const std::vector<SourceFile>& files,
                                             const DatasetOptions& options = {},
                                             EnumerationStats* stats = nullptr);

// Seeded down-sampling to exactly target_pos positives and target_neg
// negatives, then a seeded shuffle. Throws InsufficientPositives or
// InsufficientNegatives with the available counts, and InvalidArgument when
// target_neg < target_pos.
std::vector<CheckerSample> build_checker_dataset(const std::vector<SourceFile>& files, std::size_t target_pos,
                                                 std::size_t target_neg, std::uint64_t seed,
                                                 const DatasetOptions& options = {},
                                                 EnumerationStats* stats = nullptr);

// Label-stratified split; returns (train, holdout).
std::pair<std::vector<CheckerSample>, std::vector<CheckerSample>> split_holdout(
    std::vector<CheckerSample> samples, double fraction, std::uint64_t seed);

// True when the first non-whitespace token of `line` is `if`.
bool starts_with_if(std::string_view line);

// Platform-independent shuffle: mt19937_64 with rejection-sampled bounds
// (std::uniform_int_distribution differs between standard libraries).
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % n;
  };
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
}

}  // namespace robgen::checker
