#include "robgen/checker/checker.hpp"

#include <algorithm>
#include <array>

#include "httplib.h"
#include "json.hpp"
#include "robgen/error.hpp"
#include "robgen/java/lexer.hpp"
#include "robgen/java/signature.hpp"
#include "robgen/log.hpp"

namespace robgen::checker {

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::Heuristic: return "heuristic";
    case Source::Oracle: return "oracle";
    case Source::Remote: return "remote";
  }
  return "heuristic";
}

Decision HeuristicChecker::predict(const Query& query) {
  auto sig = java::find_signature(query.prefix);
  if (!sig) throw Error(ErrorKind::MalformedPrefix, "prefix does not start with a method signature");

  // anything but comments after the opening brace means a statement exists
  java::LexResult body = java::lex(std::string_view(query.prefix).substr(sig->body_open + 1));
  bool started = body.tokens.front().kind != java::TokenKind::Eof;

  bool guard = false;
  if (!started) {
    static constexpr std::array<std::string_view, 4> kIndexNames{"index", "idx", "pos", "offset"};
    for (const auto& p : sig->params) {
      if (p.is_reference()) guard = true;
      if (options_.guard_index_params && (p.type == "int" || p.type == "long") &&
          std::find(kIndexNames.begin(), kIndexNames.end(), p.name) != kIndexNames.end())
        guard = true;
    }
  }
  return {guard, guard ? 1.0 : 0.0, Source::Heuristic};
}

Decision OracleChecker::predict(const Query& query) {
  auto it = script_.find(query.line_index);
  bool yes = it != script_.end() && it->second;
  return {yes, yes ? 1.0 : 0.0, Source::Oracle};
}

struct RemoteChecker::Impl {
  std::string base;
  std::string path;
  std::unique_ptr<httplib::Client> client;
};

RemoteChecker::RemoteChecker(RemoteOptions options) : impl_(std::make_unique<Impl>()) {
  // split scheme://host:port from the path
  std::string url = options.url;
  std::size_t scheme = url.find("://");
  std::size_t slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  impl_->base = slash == std::string::npos ? url : url.substr(0, slash);
  impl_->path = slash == std::string::npos ? "/" : url.substr(slash);
  if (impl_->base.empty()) throw Error(ErrorKind::InvalidArgument, "checker url is empty");
  impl_->client = std::make_unique<httplib::Client>(impl_->base);
  auto ms = std::chrono::milliseconds(std::max(1, options.timeout_ms));
  impl_->client->set_connection_timeout(ms);
  impl_->client->set_read_timeout(ms);
  impl_->client->set_write_timeout(ms);
}

RemoteChecker::~RemoteChecker() = default;

Decision RemoteChecker::predict(const Query& query) {
  const Decision fallback{false, 0.0, Source::Remote};
  auto degrade = [&](ErrorKind kind, const std::string& why) {
    ++failures_;
    log::warn(std::string(robgen::to_string(kind)) + ": remote checker " + impl_->base + impl_->path + ": " + why +
              "; answering no");
    return fallback;
  };

  nlohmann::json body = {{"prefix", query.prefix}, {"line_index", query.line_index}};
  auto res = impl_->client->Post(impl_->path, body.dump(), "application/json");
  if (!res) {
    auto err = res.error();
    ErrorKind kind = err == httplib::Error::Read || err == httplib::Error::Write ||
                             err == httplib::Error::ConnectionTimeout
                         ? ErrorKind::Timeout
                         : ErrorKind::CheckerError;
    return degrade(kind, httplib::to_string(err));
  }
  if (res->status != 200) return degrade(ErrorKind::MalformedResponse, "HTTP " + std::to_string(res->status));
  try {
    auto j = nlohmann::json::parse(res->body);
    Decision d;
    d.source = Source::Remote;
    d.needs_if = j.at("needs_if").get<bool>();
    d.score = j.contains("score") ? j.at("score").get<double>() : (d.needs_if ? 1.0 : 0.0);
    if (!(d.score >= 0.0 && d.score <= 1.0)) return degrade(ErrorKind::MalformedResponse, "score outside [0,1]");
    return d;
  } catch (const nlohmann::json::exception& e) {
    return degrade(ErrorKind::MalformedResponse, e.what());
  }
}

}  // namespace robgen::checker
