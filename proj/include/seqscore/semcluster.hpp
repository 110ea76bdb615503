#pragma once

// Semantic clustering of generated answers.
//
// Wire protocol of the entailment oracle (HTTP, JSON bodies):
//   POST <endpoint>   {"premise": "...", "hypothesis": "...", "context": "..."}
//                     "context" is omitted when empty.
//   reply 2xx         {"entails": true | false}
// An endpoint URL without a path posts to /entails.

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace seqscore {

struct EntailmentVerdict {
  std::string premise;
  std::string hypothesis;
  bool entails = false;
};

class EntailmentOracle {
 public:
  virtual ~EntailmentOracle() = default;
  virtual EntailmentVerdict entails(const std::string& premise, const std::string& hypothesis,
                                    const std::string& context) = 0;
};

struct HttpOracleOptions {
  std::string endpoint;
  std::chrono::milliseconds timeout{10'000};
  bool cache = true;
};

/// Oracle client speaking the protocol above. Thread-safe.
///
/// Errors: TransportError (Unreachable / Timeout / HttpStatus) and
/// ProtocolError for a 2xx reply that does not match the schema.
class HttpEntailmentOracle final : public EntailmentOracle {
 public:
  explicit HttpEntailmentOracle(HttpOracleOptions options);

  EntailmentVerdict entails(const std::string& premise, const std::string& hypothesis,
                            const std::string& context) override;

  /// Requests that went over the network (cache hits excluded).
  std::size_t request_count() const;

  const std::string& host() const noexcept { return host_; }
  const std::string& path() const noexcept { return path_; }

 private:
  bool query(const std::string& premise, const std::string& hypothesis, const std::string& context);

  HttpOracleOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::tuple<std::string, std::string, std::string>, bool> cache_;
  std::size_t requests_ = 0;
};

/// One uncached oracle query.
EntailmentVerdict entails(const std::string& premise, const std::string& hypothesis,
                          const std::string& endpoint,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds{10'000});

struct ExactMatch {};
struct NormalizedMatch {};
struct EntailmentMatch {
  std::shared_ptr<EntailmentOracle> oracle;
  /// Question text forwarded to the oracle; may be empty.
  std::string context;
};

using ClusterStrategy = std::variant<ExactMatch, NormalizedMatch, EntailmentMatch>;

/// Greedy representative clustering. Each answer is compared with the first
/// member of every existing cluster, in creation order, and joins the first
/// equivalent one; otherwise it opens a new cluster. Entailment equivalence is
/// bidirectional. Ids are dense, in first-appearance order.
/// Throws InputError on empty input.
std::vector<std::size_t> cluster(const std::vector<std::string>& answers, const ClusterStrategy& strategy);

/// Builds a strategy from a CLI name: "exact", "normalized", "entailment".
ClusterStrategy make_cluster_strategy(const std::string& name, const std::string& endpoint,
                                      std::chrono::milliseconds timeout);

}  // namespace seqscore
