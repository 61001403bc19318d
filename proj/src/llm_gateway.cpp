#include "psl/llm_gateway.hpp"

#include "psl/errors.hpp"
#include "psl/jsonl.hpp"
#include "psl/text.hpp"

#include <nlohmann/json.hpp>

#ifdef PSL_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

namespace psl::gateway {

void GatewayConfig::validate() const {
    if (temperature < 0.0)
        throw UsageError("gateway temperature must be >= 0");
    if (max_inflight < 1)
        throw UsageError("gateway max_inflight must be >= 1");
    if (retry.max_attempts < 1)
        throw UsageError("gateway retry.max_attempts must be >= 1");
    if (backend != "mock" && backend != "http")
        throw UsageError("gateway backend must be mock or http");
}

namespace {

std::string concat_messages(const std::vector<Message>& messages) {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty())
            out.push_back('\n');
        out += m.content;
    }
    return out;
}

void check_messages(const std::vector<Message>& messages) {
    if (messages.empty())
        throw UsageError("gateway: empty message list");
    for (const auto& m : messages)
        if (m.role != "system" && m.role != "user" && m.role != "assistant")
            throw UsageError("gateway: unknown message role " + m.role);
}

std::string substitute_hash(std::string reply, const std::string& hash) {
    const std::string slot = "{{hash}}";
    std::size_t pos = 0;
    while ((pos = reply.find(slot, pos)) != std::string::npos) {
        reply.replace(pos, slot.size(), hash);
        pos += hash.size();
    }
    return reply;
}

} // namespace

MockGateway::MockGateway(std::vector<MockRule> rules, bool echo) : echo_(echo) {
    for (auto& r : rules)
        rules_.push_back(RuleState{std::move(r), 0});
}

Completion MockGateway::complete(const std::vector<Message>& messages) {
    check_messages(messages);
    int now = ++concurrent_;
    int prev_max = max_concurrent_.load();
    while (now > prev_max && !max_concurrent_.compare_exchange_weak(prev_max, now)) {
    }
    ++calls_;

    std::string prompt = concat_messages(messages);
    std::string hash = text::hex64(text::fnv1a64(prompt)).substr(0, 8);

    std::string reply;
    bool found = false;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        for (auto& rs : rules_) {
            bool hit = rs.rule.match == MockRule::Match::Exact
                           ? prompt == rs.rule.pattern
                           : prompt.find(rs.rule.pattern) != std::string::npos;
            if (hit && !rs.rule.replies.empty()) {
                reply = rs.rule.replies[std::min(rs.next, rs.rule.replies.size() - 1)];
                ++rs.next;
                found = true;
                break;
            }
        }
        ++usage_.requests_attempted;
        if (found || echo_)
            ++usage_.completions_returned;
    }
    --concurrent_;

    if (!found) {
        if (!echo_)
            throw GatewayError("mock gateway: no scripted reply for prompt hash " + hash);
        reply = "mock-echo " + hash;
    }
    Completion c;
    c.text = substitute_hash(reply, hash);
    c.prompt_tokens = text::estimate_tokens(prompt);
    c.completion_tokens = text::estimate_tokens(c.text);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        usage_.prompt_tokens += c.prompt_tokens;
        usage_.completion_tokens += c.completion_tokens;
    }
    return c;
}

UsageReport MockGateway::usage() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return usage_;
}

std::vector<MockRule> MockGateway::load_script(const std::string& path) {
    auto records = jsonl::read_file(path);
    std::vector<MockRule> rules;
    for (const auto& j : records) {
        MockRule r;
        std::string match = j.value("match", "contains");
        r.match = match == "exact" ? MockRule::Match::Exact : MockRule::Match::Contains;
        r.pattern = j.at("pattern").get<std::string>();
        if (j.contains("replies"))
            for (const auto& rep : j.at("replies"))
                r.replies.push_back(rep.get<std::string>());
        else
            r.replies.push_back(j.at("reply").get<std::string>());
        rules.push_back(std::move(r));
    }
    return rules;
}

HttpGateway::HttpGateway(GatewayConfig config) : config_(std::move(config)) {
    std::string url = config_.base_url;
    auto scheme_end = url.find("://");
    std::size_t authority_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', authority_start);
    if (path_start == std::string::npos) {
        host_ = url;
    } else {
        host_ = url.substr(0, path_start);
        path_prefix_ = url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/')
            path_prefix_.pop_back();
    }
}

Completion HttpGateway::complete(const std::vector<Message>& messages) {
    check_messages(messages);

    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = config_.temperature;
    body["max_tokens"] = config_.max_tokens;
    auto& msgs = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages)
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    std::string payload = body.dump();

    const char* key = nullptr;
    if (!config_.api_key_env.empty())
        key = std::getenv(config_.api_key_env.c_str());

    std::string endpoint = path_prefix_ + "/chat/completions";
    std::string last_error;

    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            ++usage_.requests_attempted;
            if (attempt > 1)
                ++usage_.retries;
        }
        httplib::Client client(host_);
        client.set_connection_timeout(config_.timeout_s, 0);
        client.set_read_timeout(config_.timeout_s, 0);
        httplib::Headers headers;
        if (key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
        if (config_.verbose)
            std::cerr << "[gateway] POST " << host_ << endpoint << " attempt " << attempt
                      << " (authorization redacted)\n";

        auto res = client.Post(endpoint, headers, payload, "application/json");
        bool retryable = false;
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            retryable = true;
        } else if (res->status == 200) {
            nlohmann::json rj;
            try {
                rj = nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw GatewayError(std::string("gateway returned invalid JSON: ") + e.what());
            }
            Completion c;
            try {
                c.text = rj.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                throw GatewayError("gateway response missing choices[0].message.content");
            }
            if (rj.contains("usage")) {
                c.prompt_tokens = rj["usage"].value("prompt_tokens", 0ULL);
                c.completion_tokens = rj["usage"].value("completion_tokens", 0ULL);
            }
            std::lock_guard<std::mutex> lock(mutex_);
            ++usage_.completions_returned;
            usage_.prompt_tokens += c.prompt_tokens;
            usage_.completion_tokens += c.completion_tokens;
            return c;
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            retryable = true;
        } else {
            throw GatewayError("gateway request failed: HTTP " + std::to_string(res->status) +
                               " " + res->body.substr(0, 200));
        }

        if (retryable && attempt < config_.retry.max_attempts) {
            int delay = config_.retry.backoff_base_ms;
            for (int i = 1; i < attempt; ++i)
                delay = std::min(delay * 2, config_.retry.backoff_cap_ms);
            delay = std::min(delay, config_.retry.backoff_cap_ms);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
    throw GatewayError("gateway request failed after " +
                       std::to_string(config_.retry.max_attempts) + " attempts: " + last_error);
}

UsageReport HttpGateway::usage() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return usage_;
}

ThrottledGateway::ThrottledGateway(std::shared_ptr<Gateway> inner, int max_inflight)
    : inner_(std::move(inner)), capacity_(max_inflight) {
    if (capacity_ < 1)
        throw UsageError("max_inflight must be >= 1");
}

Completion ThrottledGateway::complete(const std::vector<Message>& messages) {
    {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return in_use_ < capacity_; });
        ++in_use_;
    }
    try {
        Completion c = inner_->complete(messages);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_use_;
        }
        cv_.notify_one();
        return c;
    } catch (...) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            --in_use_;
        }
        cv_.notify_one();
        throw;
    }
}

std::shared_ptr<Gateway> make_gateway(const GatewayConfig& config) {
    config.validate();
    std::shared_ptr<Gateway> inner;
    if (config.backend == "mock") {
        std::vector<MockRule> rules;
        if (!config.mock_script_path.empty())
            rules = MockGateway::load_script(config.mock_script_path);
        inner = std::make_shared<MockGateway>(std::move(rules), config.mock_echo);
    } else {
        inner = std::make_shared<HttpGateway>(config);
    }
    return std::make_shared<ThrottledGateway>(std::move(inner), config.max_inflight);
}

} // namespace psl::gateway
