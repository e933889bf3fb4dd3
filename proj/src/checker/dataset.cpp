#include "robgen/checker/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/java/lexer.hpp"
#include "robgen/java/parser.hpp"

namespace robgen::checker {

using java::Node;
using java::NodeKind;

void to_json(nlohmann::json& j, const CheckerSample& s) {
  j = {{"prefix", s.prefix}, {"label", s.label ? 1 : 0}, {"repo", s.repo}, {"method_id", s.method_id}};
}

void from_json(const nlohmann::json& j, CheckerSample& s) {
  j.at("prefix").get_to(s.prefix);
  const auto& l = j.at("label");
  s.label = l.is_boolean() ? l.get<bool>() : l.get<int>() != 0;
  s.repo = j.value("repo", "");
  s.method_id = j.value("method_id", "");
}

std::vector<SourceFile> load_repo(const std::filesystem::path& root) {
  std::vector<SourceFile> out;
  std::string repo = root.filename().string();
  if (repo.empty()) repo = root.parent_path().filename().string();
  for (const auto& f : io::list_files(root, ".java"))
    out.push_back({repo, std::filesystem::relative(f, root).generic_string(), io::read_file(f)});
  return out;
}

bool starts_with_if(std::string_view line) {
  java::LexResult r = java::lex(line);
  const auto& t = r.tokens.front();
  return t.kind == java::TokenKind::Keyword && line.substr(t.offset, t.length) == "if";
}

namespace {

bool has_error(const Node& n) {
  bool found = false;
  java::walk(n, [&](const Node& c) {
    if (c.kind == NodeKind::Error) found = true;
    return !found;
  });
  return found;
}

}  // namespace

std::vector<CheckerSample> enumerate_samples(const SourceFile& file, const DatasetOptions& options,
                                             EnumerationStats* stats) {
  std::vector<CheckerSample> out;
  java::SyntaxTree tree = java::parse_source(file.text);
  const auto& toks = tree.tokens();
  const std::string& src = tree.source();

  std::vector<std::size_t> line_start{0};
  for (std::size_t i = 0; i < src.size(); ++i)
    if (src[i] == '\n') line_start.push_back(i + 1);
  auto line_end = [&](std::uint32_t line) {  // offset just past line's '\n'
    return line < line_start.size() ? line_start[line] : src.size();
  };
  auto line_text = [&](std::uint32_t line) {
    std::size_t b = line_start[line - 1];
    std::size_t e = line < line_start.size() ? line_start[line] - 1 : src.size();
    return std::string_view(src).substr(b, e - b);
  };
  std::unordered_map<std::uint32_t, std::uint32_t> first_on_line;
  for (std::uint32_t i = 0; i + 1 < toks.size(); ++i) first_on_line.emplace(toks[i].line, i);

  EnumerationStats local;
  local.files = 1;
  java::walk(tree.root(), [&](const Node& m) {
    if (m.kind != NodeKind::MethodDecl) return true;
    ++local.methods;
    const Node* body = nullptr;
    for (const auto& c : m.children)
      if (c.kind == NodeKind::Block) body = &c;
    if (!body) return true;
    if (has_error(m)) {
      ++local.skipped_methods;
      return true;
    }
    // skip leading annotations
    std::uint32_t t = m.first;
    while (t < m.last && tree.text(t) == "@" && tree.text(t + 1) != "interface") {
      t += 2;
      while (t + 1 < m.last && tree.text(t) == ".") t += 2;
      if (t < m.last && tree.text(t) == "(") {
        int depth = 0;
        for (; t < m.last; ++t) {
          if (tree.text(t) == "(") ++depth;
          else if (tree.text(t) == ")" && --depth == 0) break;
        }
        ++t;
      }
    }
    const std::size_t start = toks[t].offset;
    const std::uint32_t open_line = toks[body->first].line;
    const std::uint32_t last_line = tree.end_line(m);
    const std::string name(m.name != java::kNoToken ? tree.text(m.name) : std::string_view("?"));
    const std::string id = file.path + "#" + name + ":" + std::to_string(toks[t].line);

    for (std::uint32_t k = open_line; k < last_line; ++k) {
      auto it = first_on_line.find(k + 1);
      if (it == first_on_line.end()) continue;  // blank, comment-only or inside a literal
      std::uint32_t f = it->second;
      bool positive = tree.text(f) == "if";
      if (!positive && options.else_if_positive && tree.text(f) == "else" && f + 1 < toks.size() &&
          tree.text(f + 1) == "if")
        positive = true;
      CheckerSample s;
      s.prefix = src.substr(start, line_end(k) - start);
      s.label = positive;
      s.repo = file.repo;
      s.method_id = id;
      s.next_line = std::string(line_text(k + 1));
      (positive ? local.positives : local.negatives) += 1;
      out.push_back(std::move(s));
    }
    return true;
  });
  if (stats) {
    stats->files += local.files;
    stats->methods += local.methods;
    stats->skipped_methods += local.skipped_methods;
    stats->positives += local.positives;
    stats->negatives += local.negatives;
  }
  return out;
}

std::vector<CheckerSample> enumerate_samples(const std::vector<SourceFile>& files, const DatasetOptions& options,
                                             EnumerationStats* stats) {
  std::vector<std::vector<CheckerSample>> per(files.size());
  std::vector<EnumerationStats> st(files.size());
  std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(files.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < files.size();) per[i] = enumerate_samples(files[i], options, &st[i]);
  };
  if (jobs == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<CheckerSample> out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::move(per[i].begin(), per[i].end(), std::back_inserter(out));
    if (stats) {
      stats->files += st[i].files;
      stats->methods += st[i].methods;
      stats->skipped_methods += st[i].skipped_methods;
      stats->positives += st[i].positives;
      stats->negatives += st[i].negatives;
    }
  }
  return out;
}

std::vector<CheckerSample> build_checker_dataset(const std::vector<SourceFile>& files, std::size_t target_pos,
                                                 std::size_t target_neg, std::uint64_t seed,
                                                 const DatasetOptions& options, EnumerationStats* stats) {
  if (target_neg < target_pos)
    throw Error(ErrorKind::InvalidArgument, "target negatives (" + std::to_string(target_neg) +
                                                ") must be at least target positives (" +
                                                std::to_string(target_pos) + ")");
  std::vector<CheckerSample> all = enumerate_samples(files, options, stats);
  std::vector<CheckerSample> pos, neg;
  for (auto& s : all) (s.label ? pos : neg).push_back(std::move(s));
  if (pos.size() < target_pos)
    throw Error(ErrorKind::InsufficientPositives, "wanted " + std::to_string(target_pos) + " positives, found " +
                                                      std::to_string(pos.size()) + " (negatives: " +
                                                      std::to_string(neg.size()) + ")");
  if (neg.size() < target_neg)
    throw Error(ErrorKind::InsufficientNegatives, "wanted " + std::to_string(target_neg) + " negatives, found " +
                                                      std::to_string(neg.size()) + " (positives: " +
                                                      std::to_string(pos.size()) + ")");
  // independent streams per stage so changing one target leaves the other's pick alone
  seeded_shuffle(pos, seed ^ 0x9e3779b97f4a7c15ULL);
  seeded_shuffle(neg, seed ^ 0xbf58476d1ce4e5b9ULL);
  pos.resize(target_pos);
  neg.resize(target_neg);
  std::vector<CheckerSample> out = std::move(pos);
  std::move(neg.begin(), neg.end(), std::back_inserter(out));
  seeded_shuffle(out, seed);
  return out;
}

std::pair<std::vector<CheckerSample>, std::vector<CheckerSample>> split_holdout(std::vector<CheckerSample> samples,
                                                                                double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "holdout fraction must be in [0, 1)");
  std::vector<CheckerSample> train, holdout;
  for (bool label : {true, false}) {
    std::vector<CheckerSample> group;
    for (auto& s : samples)
      if (s.label == label) group.push_back(std::move(s));
    seeded_shuffle(group, seed + (label ? 1 : 2));
    auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < group.size(); ++i) (i < n ? holdout : train).push_back(std::move(group[i]));
  }
  seeded_shuffle(train, seed);
  seeded_shuffle(holdout, seed);
  return {std::move(train), std::move(holdout)};
}

}  // namespace robgen::checker
