#pragma once

// In-process entailment server on 127.0.0.1 for exercising the HTTP client.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <json.hpp>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace seqscore::testing {

class MockOracle {
 public:
  using Verdict = std::function<bool(const std::string& premise, const std::string& hypothesis)>;

  enum class Mode { Normal, Status500, BadBody, Slow };

  explicit MockOracle(Verdict verdict, std::string path = "/entails") : verdict_(std::move(verdict)) {
    server_.Post(path, [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("mock oracle: bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockOracle() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  MockOracle(const MockOracle&) = delete;
  MockOracle& operator=(const MockOracle&) = delete;

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string endpoint() const { return base_url() + "/entails"; }
  int port() const { return port_; }

  std::size_t calls() const { return calls_.load(); }
  void set_mode(Mode m) { mode_.store(m); }
  void set_delay(std::chrono::milliseconds d) { delay_ms_.store(d.count()); }

  std::string last_context() const {
    std::lock_guard lock(mutex_);
    return last_context_;
  }
  bool last_had_context() const {
    std::lock_guard lock(mutex_);
    return last_had_context_;
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    ++calls_;
    switch (mode_.load()) {
      case Mode::Status500:
        res.status = 500;
        res.set_content("boom", "text/plain");
        return;
      case Mode::BadBody:
        res.set_content(R"({"verdict": "yes"})", "application/json");
        return;
      case Mode::Slow:
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_.load()));
        break;
      case Mode::Normal:
        break;
    }
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("premise") || !body.contains("hypothesis")) {
      res.status = 400;
      return;
    }
    {
      std::lock_guard lock(mutex_);
      last_had_context_ = body.contains("context");
      last_context_ = last_had_context_ ? body["context"].get<std::string>() : std::string();
    }
    const bool e = verdict_(body["premise"].get<std::string>(), body["hypothesis"].get<std::string>());
    res.set_content(nlohmann::json{{"entails", e}}.dump(), "application/json");
  }

  Verdict verdict_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<std::size_t> calls_{0};
  std::atomic<Mode> mode_{Mode::Normal};
  std::atomic<long long> delay_ms_{0};
  mutable std::mutex mutex_;
  std::string last_context_;
  bool last_had_context_ = false;
};

}  // namespace seqscore::testing
