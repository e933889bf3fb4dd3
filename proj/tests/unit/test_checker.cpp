#include "doctest.h"

#include <chrono>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "httplib.h"
#include "json.hpp"
#include "robgen/checker/checker.hpp"
#include "robgen/checker/dataset.hpp"
#include "robgen/error.hpp"
#include "robgen/io.hpp"
#include "robgen/log.hpp"

using namespace robgen;
using namespace robgen::checker;

namespace {

const std::filesystem::path kRepo = std::filesystem::path(ROBGEN_FIXTURES) / "checker_repo";

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

// Test server on an ephemeral port; the handler decides the response.
struct Server {
  httplib::Server srv;
  std::thread th;
  int port = 0;
  explicit Server(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    srv.Post("/predict", std::move(h));
    port = srv.bind_to_any_port("127.0.0.1");
    th = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~Server() {
    srv.stop();
    th.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/predict"; }
};

std::vector<std::string> file_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// A synthetic repository: `methods` methods, each with a random mix of
// guard lines and plain statements.
std::vector<SourceFile> synthetic_repo(std::size_t methods, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<SourceFile> files;
  const char* plain[] = {"int a = x + 1;", "log(\"step\");", "total += x;", "x = next(x);", "return;"};
  for (std::size_t f = 0; f * 50 < methods; ++f) {
    std::string text = "class Gen" + std::to_string(f) + " {\n";
    for (std::size_t m = f * 50; m < std::min(methods, (f + 1) * 50); ++m) {
      text += "    void m" + std::to_string(m) + "(Object o, int x) {\n";
      std::size_t lines = 3 + rng() % 8;
      for (std::size_t l = 0; l < lines; ++l) {
        if (rng() % 3 == 0)
          text += "        if (o == null) return;\n";
        else
          text += std::string("        ") + plain[rng() % 4] + "\n";
      }
      text += "    }\n";
    }
    text += "}\n";
    files.push_back({"synthetic", "Gen" + std::to_string(f) + ".java", text});
  }
  return files;
}

std::string to_jsonl(const std::vector<CheckerSample>& v) {
  std::string out;
  for (const auto& s : v) out += nlohmann::json(s).dump() + "\n";
  return out;
}

}  // namespace

TEST_CASE("heuristic checker") {
  HeuristicChecker h;
  CHECK(h.predict({"String f(String s) {", 1}).needs_if);
  CHECK(h.predict({"String f(String s) {\n", 1}).score == 1.0);
  CHECK_FALSE(h.predict({"int f(int a) {", 1}).needs_if);
  CHECK(h.predict({"int f(int[] a) {\n", 1}).needs_if);
  CHECK(h.predict({"int f(int... a) {\n", 1}).needs_if);
  CHECK(h.predict({"public static <T> List<T> f(final @NonNull Map<String, T> m, int k) throws IOException {\n", 1}).needs_if);
  CHECK_FALSE(h.predict({"String f(String s) {\n    int n = s.length();\n    n++;\n", 3}).needs_if);
  CHECK_FALSE(h.predict({"String f(String s) {\n    s = s.trim();\n", 2}).needs_if);
  CHECK(h.predict({"String f(String s) {\n    // only a comment\n", 2}).needs_if);
  CHECK_FALSE(h.predict({"void f() {\n", 1}).needs_if);
  CHECK(kind_of([&] { h.predict({"    int x = 1;\n", 1}); }) == ErrorKind::MalformedPrefix);
  CHECK(kind_of([&] { h.predict({"", 1}); }) == ErrorKind::MalformedPrefix);

  HeuristicChecker idx({.guard_index_params = true});
  CHECK(idx.predict({"char at(int index) {\n", 1}).needs_if);
  CHECK_FALSE(h.predict({"char at(int index) {\n", 1}).needs_if);
}

TEST_CASE("oracle checker") {
  OracleChecker o({{2, true}});
  CHECK(o.predict({"", 2}).needs_if);
  CHECK(o.predict({"", 2}).source == Source::Oracle);
  CHECK_FALSE(o.predict({"", 3}).needs_if);
  OracleChecker empty;
  for (std::uint32_t l = 1; l < 10; ++l) CHECK_FALSE(empty.predict({"", l}).needs_if);
}

TEST_CASE("remote checker protocol") {
  QuietLog quiet;
  std::string seen;
  Server ok([&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"needs_if":true,"score":0.93})", "application/json");
  });
  RemoteChecker rc({ok.url(), 2000});
  Decision d = rc.predict({"String f(String s) {\n", 1});
  CHECK(d.needs_if);
  CHECK(d.score == doctest::Approx(0.93));
  CHECK(d.source == Source::Remote);
  CHECK(nlohmann::json::parse(seen).at("prefix") == "String f(String s) {\n");

  Server slow([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(R"({"needs_if":true,"score":1})", "application/json");
  });
  RemoteChecker impatient({slow.url(), 100});
  Decision t = impatient.predict({"String f(String s) {\n", 1});
  CHECK_FALSE(t.needs_if);
  CHECK(t.score == 0.0);
  CHECK(impatient.failures() == 1);
  CHECK(quiet.lines.back().find("Timeout") != std::string::npos);

  for (std::string body : {"not json", R"({"score":0.5})", R"({"needs_if":"yes"})", R"({"needs_if":true,"score":7})"}) {
    CAPTURE(body);
    Server bad([body](const httplib::Request&, httplib::Response& res) { res.set_content(body, "application/json"); });
    RemoteChecker rb({bad.url(), 2000});
    Decision m = rb.predict({"String f(String s) {\n", 1});
    CHECK_FALSE(m.needs_if);
    CHECK(m.score == 0.0);
    CHECK(quiet.lines.back().find("MalformedResponse") != std::string::npos);
  }

  Server err([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  CHECK_FALSE(RemoteChecker({err.url(), 2000}).predict({"x", 1}).needs_if);

  // nothing listening
  RemoteChecker gone({"http://127.0.0.1:1/predict", 200});
  CHECK_FALSE(gone.predict({"x", 1}).needs_if);
  CHECK(gone.failures() == 1);
}

TEST_CASE("dataset: fixture repo matches the hand enumeration") {
  auto files = load_repo(kRepo / "demo");
  REQUIRE(files.size() == 2);
  CHECK(files[0].path == "src/Shapes.java");
  CHECK(files[0].repo == "demo");

  EnumerationStats stats;
  auto got = enumerate_samples(files, {}, &stats);
  CHECK(stats.skipped_methods == 1);  // broken()

  auto expected = nlohmann::json::parse(io::read_file(kRepo / "expected.json"));
  const auto& want = expected.at("samples");
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& w = want[i];
    CAPTURE(i);
    auto lines = file_lines(io::read_file(kRepo / "demo" / w.at("file").get<std::string>()));
    auto sl = w.at("start_line").get<std::size_t>(), el = w.at("end_line").get<std::size_t>();
    std::string prefix = lines[sl - 1].substr(w.at("start_col").get<std::size_t>() - 1) + "\n";
    for (std::size_t l = sl + 1; l <= el; ++l) prefix += lines[l - 1] + "\n";
    CHECK(got[i].method_id == w.at("method_id").get<std::string>());
    CHECK(got[i].prefix == prefix);
    CHECK(got[i].label == (w.at("label").get<int>() == 1));
    CHECK(got[i].repo == "demo");
    CHECK(got[i].next_line == lines[el]);
  }

  // else-if toggle flips exactly the one else-if line
  auto toggled = enumerate_samples(files, {.else_if_positive = true});
  REQUIRE(toggled.size() == got.size());
  std::size_t flips = 0;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (toggled[i].label != got[i].label) {
      ++flips;
      CHECK(got[i].method_id == "src/Util.java#sign:20");
      CHECK(got[i].next_line.find("else if") != std::string::npos);
    }
  CHECK(flips == 1);
}

TEST_CASE("dataset: five-line method") {
  SourceFile f{"r", "A.java",
               "int f(int[] a) {\n    int n = a.length;\n    if (n == 0) return 0;\n    n--;\n}\n"};
  auto s = enumerate_samples(f);
  REQUIRE(s.size() == 4);
  std::vector<bool> labels;
  for (const auto& x : s) labels.push_back(x.label);
  CHECK(labels == std::vector<bool>{false, true, false, false});
  CHECK(s[1].prefix == "int f(int[] a) {\n    int n = a.length;\n");

  SourceFile no_if{"r", "B.java", "void g() {\n    a();\n    b();\n}\n"};
  for (const auto& x : enumerate_samples(no_if)) CHECK_FALSE(x.label);
}

TEST_CASE("dataset: targets, determinism, soundness") {
  auto files = synthetic_repo(3000, 17);
  EnumerationStats stats;
  auto all = enumerate_samples(files, {}, &stats);
  REQUIRE(stats.positives >= 4000);
  REQUIRE(stats.negatives >= 8000);

  auto a = build_checker_dataset(files, 4000, 8000, 42);
  auto b = build_checker_dataset(files, 4000, 8000, 42, {.jobs = 4});
  CHECK(a.size() == 12000);
  std::size_t pos = 0;
  for (const auto& s : a) pos += s.label;
  CHECK(pos == 4000);
  CHECK(to_jsonl(a) == to_jsonl(b));
  CHECK(to_jsonl(a) != to_jsonl(build_checker_dataset(files, 4000, 8000, 43)));

  for (const auto& s : a) {
    CHECK(s.prefix.back() == '\n');
    CHECK(s.prefix.rfind("void m", 0) == 0);
    CHECK(starts_with_if(s.next_line) == s.label);
  }

  CHECK(kind_of([&] { build_checker_dataset(files, stats.positives + 1, stats.positives + 1, 1); }) ==
        ErrorKind::InsufficientPositives);
  CHECK(kind_of([&] { build_checker_dataset(files, 10, stats.negatives + 1, 1); }) == ErrorKind::InsufficientNegatives);
  CHECK(kind_of([&] { build_checker_dataset(files, 10, 5, 1); }) == ErrorKind::InvalidArgument);

  auto [train, hold] = split_holdout(a, 0.1, 7);
  CHECK(train.size() + hold.size() == a.size());
  std::size_t hold_pos = 0;
  for (const auto& s : hold) hold_pos += s.label;
  CHECK(hold_pos == 400);
  CHECK(hold.size() == 1200);
}

TEST_CASE("sample json") {
  CheckerSample s{"void f() {\n", true, "r", "A.java#f:1", "    if (x) y();"};
  auto j = nlohmann::json(s);
  CHECK(j.at("label") == 1);
  CHECK_FALSE(j.contains("next_line"));
  auto back = j.get<CheckerSample>();
  CHECK(back.prefix == s.prefix);
  CHECK(back.label);
}

TEST_CASE("seeded shuffle is a permutation") {
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i;
  auto w = v;
  seeded_shuffle(w, 5);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
  std::vector<int> one{1};
  seeded_shuffle(one, 1);
  CHECK(one == std::vector<int>{1});
}
