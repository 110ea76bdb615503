#include "seqscore/semcluster.hpp"

#include <httplib.h>

#include <json.hpp>

#include "seqscore/errors.hpp"
#include "seqscore/text.hpp"

namespace seqscore {

namespace {

using nlohmann::json;

/// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InputError("oracle endpoint must be an http:// URL: " + url);
  if (url.compare(0, scheme_end, "http") != 0) {
    throw InputError("only http:// oracle endpoints are supported: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/entails"};
  std::string path = url.substr(path_start);
  if (path == "/") path = "/entails";
  return {url.substr(0, path_start), path};
}

}  // namespace

HttpEntailmentOracle::HttpEntailmentOracle(HttpOracleOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) {
    throw ConfigError("entailment clustering needs an oracle endpoint (--nli-endpoint or SEQSCORE_NLI_ENDPOINT)");
  }
  std::tie(host_, path_) = split_endpoint(options_.endpoint);
}

EntailmentVerdict HttpEntailmentOracle::entails(const std::string& premise, const std::string& hypothesis,
                                                const std::string& context) {
  if (options_.cache) {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find({premise, hypothesis, context}); it != cache_.end()) {
      return {premise, hypothesis, it->second};
    }
  }
  const bool verdict = query(premise, hypothesis, context);
  if (options_.cache) {
    std::lock_guard lock(mutex_);
    cache_.emplace(std::make_tuple(premise, hypothesis, context), verdict);
  }
  return {premise, hypothesis, verdict};
}

std::size_t HttpEntailmentOracle::request_count() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

bool HttpEntailmentOracle::query(const std::string& premise, const std::string& hypothesis,
                                 const std::string& context) {
  json body = {{"premise", premise}, {"hypothesis", hypothesis}};
  if (!context.empty()) body["context"] = context;

  httplib::Client client(host_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  {
    std::lock_guard lock(mutex_);
    ++requests_;
  }
  const auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const std::string what = "entailment oracle " + options_.endpoint + ": " + httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw TransportError(TransportError::Kind::Timeout, what);
    }
    throw TransportError(TransportError::Kind::Unreachable, what);
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(TransportError::Kind::HttpStatus,
                         "entailment oracle " + options_.endpoint + " replied HTTP " +
                             std::to_string(res->status),
                         res->status);
  }
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError("entailment oracle reply is not JSON: " + std::string(e.what()));
  }
  if (!reply.is_object() || !reply.contains("entails") || !reply["entails"].is_boolean()) {
    throw ProtocolError("entailment oracle reply lacks boolean 'entails': " + res->body);
  }
  return reply["entails"].get<bool>();
}

EntailmentVerdict entails(const std::string& premise, const std::string& hypothesis,
                          const std::string& endpoint, std::chrono::milliseconds timeout) {
  HttpEntailmentOracle oracle({endpoint, timeout, false});
  return oracle.entails(premise, hypothesis, {});
}

std::vector<std::size_t> cluster(const std::vector<std::string>& answers, const ClusterStrategy& strategy) {
  if (answers.empty()) throw InputError("cannot cluster an empty answer list");

  std::vector<std::string> keys;
  if (std::holds_alternative<NormalizedMatch>(strategy)) {
    keys.reserve(answers.size());
    for (const auto& a : answers) keys.push_back(normalize_answer(a));
  }
  const auto* entail = std::get_if<EntailmentMatch>(&strategy);
  if (entail && !entail->oracle) throw ConfigError("entailment clustering without an oracle");

  const auto equivalent = [&](std::size_t rep, std::size_t i) {
    if (entail) {
      return entail->oracle->entails(answers[rep], answers[i], entail->context).entails &&
             entail->oracle->entails(answers[i], answers[rep], entail->context).entails;
    }
    if (!keys.empty()) return keys[rep] == keys[i];
    return answers[rep] == answers[i];
  };

  std::vector<std::size_t> representatives;
  std::vector<std::size_t> ids(answers.size());
  for (std::size_t i = 0; i < answers.size(); ++i) {
    std::size_t k = 0;
    while (k < representatives.size() && !equivalent(representatives[k], i)) ++k;
    if (k == representatives.size()) representatives.push_back(i);
    ids[i] = k;
  }
  return ids;
}

ClusterStrategy make_cluster_strategy(const std::string& name, const std::string& endpoint,
                                      std::chrono::milliseconds timeout) {
  if (name == "exact") return ExactMatch{};
  if (name == "normalized") return NormalizedMatch{};
  if (name == "entailment") {
    return EntailmentMatch{std::make_shared<HttpEntailmentOracle>(HttpOracleOptions{endpoint, timeout, true}), {}};
  }
  throw InputError("unknown cluster strategy '" + name + "'");
}

}  // namespace seqscore
