#include "psl/config.hpp"

#include "psl/errors.hpp"
#include "psl/text.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace psl::config {

KeyValues KeyValues::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file " + path);
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = text::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(line_no) +
                             ": expected 'key = value', got '" + t + "'");
        std::string key = text::trim(t.substr(0, eq));
        std::string value = text::trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
        kv.values_[key] = value;
    }
    return kv;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw UsageError("config key " + key + " is not a number: " + it->second);
    }
}

int64_t KeyValues::get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw UsageError("config key " + key + " is not an integer: " + it->second);
    }
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    std::string v = text::to_lower(it->second);
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw UsageError("config key " + key + " is not a boolean: " + it->second);
}

std::string KeyValues::canonical() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_)
        out << k << " = " << v << "\n";
    return out.str();
}

std::string KeyValues::hash() const { return text::hex64(text::fnv1a64(canonical())); }

go::PruningParams AppConfig::pruning() const {
    go::PruningParams p;
    p.lambda = kv.get_double("prune.lambda", 0.001);
    p.beta = kv.get_double("prune.beta", 0.5);
    p.tau0 = kv.get_double("prune.tau0", 10.0);
    p.alpha = kv.get_double("prune.alpha", 0.9);
    p.total_count = static_cast<uint64_t>(kv.get_int("prune.total_count", 0));
    return p;
}

dedup::DedupOptions AppConfig::dedup_options() const {
    dedup::DedupOptions d;
    d.cluster.threshold = kv.get_double("dedup.identity", 0.70);
    d.cluster.use_prefilter = kv.get_bool("dedup.prefilter", true);
    d.cluster.prefilter_k = static_cast<std::size_t>(kv.get_int("dedup.prefilter_k", 5));
    d.cluster.prefilter_min_shared = kv.get_double("dedup.prefilter_min_shared", 0.3);
    d.per_group_target = static_cast<std::size_t>(kv.get_int("dedup.per_group_target", 0));
    d.ic_log_base = kv.get_double("dedup.ic_log_base", 0.0);
    return d;
}

context::RetrievalConfig AppConfig::retrieval() const {
    context::RetrievalConfig r;
    r.mode = context::mode_from_string(kv.get_string("retrieval.mode", "dual"));
    r.k = static_cast<std::size_t>(kv.get_int("retrieval.k", 4));
    r.candidate_m = static_cast<std::size_t>(kv.get_int("retrieval.candidate_m", 50));
    r.rrf_k = kv.get_double("retrieval.rrf_k", 60.0);
    r.token_budget = static_cast<std::size_t>(kv.get_int("retrieval.token_budget", 8192));
    r.seq_kmer_k = static_cast<std::size_t>(kv.get_int("retrieval.seq_kmer_k", 3));
    r.token_multiplier = kv.get_double("retrieval.token_multiplier", 1.0);
    r.most_relevant_last = kv.get_bool("retrieval.most_relevant_last", true);
    r.exclude_near_duplicates = kv.get_bool("retrieval.exclude_near_duplicates", false);
    r.near_duplicate_identity = kv.get_double("retrieval.near_duplicate_identity", 0.95);
    return r;
}

gateway::GatewayConfig AppConfig::gateway_config() const {
    gateway::GatewayConfig g;
    g.backend = kv.get_string("gateway.backend", "mock");
    g.base_url = kv.get_string("gateway.base_url", "http://localhost:8080/v1");
    g.api_key_env = kv.get_string("gateway.api_key_env", "PSL_API_KEY");
    g.model = kv.get_string("gateway.model", "mock-model");
    g.temperature = kv.get_double("gateway.temperature", 0.0);
    g.max_tokens = static_cast<int>(kv.get_int("gateway.max_tokens", 1024));
    g.timeout_s = static_cast<int>(kv.get_int("gateway.timeout_s", 60));
    g.max_inflight = static_cast<int>(kv.get_int("gateway.max_inflight", 4));
    g.retry.max_attempts = static_cast<int>(kv.get_int("gateway.retry.max_attempts", 3));
    g.retry.backoff_base_ms = static_cast<int>(kv.get_int("gateway.retry.backoff_base_ms", 250));
    g.retry.backoff_cap_ms = static_cast<int>(kv.get_int("gateway.retry.backoff_cap_ms", 4000));
    g.verbose = kv.get_bool("gateway.verbose", false);
    g.mock_script_path = kv.get_string("gateway.mock_script", "");
    g.mock_echo = kv.get_bool("gateway.mock_echo", true);
    return g;
}

std::string AppConfig::prompts_dir() const { return kv.get_string("prompts.dir", "prompts"); }

int AppConfig::gen_retries() const { return static_cast<int>(kv.get_int("gen.retries", 2)); }

std::string AppConfig::gen_source_model() const {
    return kv.get_string("gen.source_model", kv.get_string("gateway.model", "mock-model"));
}

AppConfig load_app_config(const std::string& path,
                          const std::map<std::string, std::string>& overrides) {
    AppConfig cfg;
    if (!path.empty())
        cfg.kv = KeyValues::from_file(path);
    if (const char* base = std::getenv("PSL_BASE_URL"); base && !cfg.kv.has("gateway.base_url"))
        cfg.kv.set("gateway.base_url", base);
    for (const auto& [k, v] : overrides)
        cfg.kv.set(k, v);
    cfg.seed = static_cast<uint64_t>(cfg.kv.get_int("seed", 0));
    return cfg;
}

} // namespace psl::config
