#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace psl::gateway {

struct Message {
    std::string role; // system | user | assistant
    std::string content;
};

struct Completion {
    std::string text;
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_base_ms = 250;
    int backoff_cap_ms = 4000;
};

struct GatewayConfig {
    std::string backend = "mock"; // mock | http
    std::string base_url = "http://localhost:8080/v1";
    std::string api_key_env = "PSL_API_KEY"; // secrets come from the environment only
    std::string model = "mock-model";
    double temperature = 0.0;
    int max_tokens = 1024;
    int timeout_s = 60;
    int max_inflight = 4;
    RetryPolicy retry;
    bool verbose = false;
    // mock backend knobs
    std::string mock_script_path;
    bool mock_echo = true;

    void validate() const;
};

// Idempotent accounting: every successful completion is counted exactly once
// no matter how many retries preceded it.
struct UsageReport {
    uint64_t requests_attempted = 0;
    uint64_t retries = 0;
    uint64_t completions_returned = 0;
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual Completion complete(const std::vector<Message>& messages) = 0;
    virtual UsageReport usage() const = 0;
};

// One reply rule; replies are consumed in order, the last one sticks.
struct MockRule {
    enum class Match { Exact, Contains };
    Match match = Match::Contains;
    std::string pattern;
    std::vector<std::string> replies;
};

// Deterministic offline backend. Rules are checked in order against the
// concatenated message contents; without a match, echo mode derives a stable
// canned answer from the prompt hash. "{{hash}}" in a reply is substituted
// with that hash.
class MockGateway : public Gateway {
public:
    explicit MockGateway(std::vector<MockRule> rules = {}, bool echo = true);

    Completion complete(const std::vector<Message>& messages) override;
    UsageReport usage() const override;

    uint64_t calls() const { return calls_.load(); }
    int max_concurrent_seen() const { return max_concurrent_.load(); }

    static std::vector<MockRule> load_script(const std::string& path);

private:
    struct RuleState {
        MockRule rule;
        std::size_t next = 0;
    };
    std::vector<RuleState> rules_;
    bool echo_;
    mutable std::mutex mutex_;
    std::atomic<uint64_t> calls_{0};
    std::atomic<int> concurrent_{0};
    std::atomic<int> max_concurrent_{0};
    UsageReport usage_;
};

// OpenAI-compatible chat-completions client. Retries 429/5xx/timeouts with
// exponential backoff; other 4xx surface immediately.
class HttpGateway : public Gateway {
public:
    explicit HttpGateway(GatewayConfig config);
    Completion complete(const std::vector<Message>& messages) override;
    UsageReport usage() const override;

private:
    GatewayConfig config_;
    std::string host_;        // scheme://host[:port]
    std::string path_prefix_; // e.g. /v1
    mutable std::mutex mutex_;
    UsageReport usage_;
};

// Counting-semaphore wrapper enforcing config.max_inflight across callers.
class ThrottledGateway : public Gateway {
public:
    ThrottledGateway(std::shared_ptr<Gateway> inner, int max_inflight);
    Completion complete(const std::vector<Message>& messages) override;
    UsageReport usage() const override { return inner_->usage(); }

private:
    std::shared_ptr<Gateway> inner_;
    int capacity_;
    int in_use_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
};

// Builds the configured backend wrapped in a ThrottledGateway.
std::shared_ptr<Gateway> make_gateway(const GatewayConfig& config);

} // namespace psl::gateway
