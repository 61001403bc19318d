#pragma once

#include "psl/context_engine.hpp"
#include "psl/corpus_dedup.hpp"
#include "psl/go_graph.hpp"
#include "psl/llm_gateway.hpp"

#include <map>
#include <string>

namespace psl::config {

// Plain-text key-value config ("key = value" lines, '#' comments). CLI flags
// override file values; the effective map feeds the config hash every output
// header records.
class KeyValues {
public:
    static KeyValues from_file(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    std::string canonical() const; // sorted "key = value" lines
    std::string hash() const;      // fnv1a64 hex of canonical()

private:
    std::map<std::string, std::string> values_;
};

struct AppConfig {
    KeyValues kv;
    uint64_t seed = 0;

    go::PruningParams pruning() const;
    dedup::DedupOptions dedup_options() const;
    context::RetrievalConfig retrieval() const;
    gateway::GatewayConfig gateway_config() const;

    std::string prompts_dir() const;
    int gen_retries() const;
    std::string gen_source_model() const;

    std::string config_hash() const { return kv.hash(); }
};

// File (optional) + flag overrides + PSL_BASE_URL environment fallback.
AppConfig load_app_config(const std::string& path,
                          const std::map<std::string, std::string>& overrides);

} // namespace psl::config
