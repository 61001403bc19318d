#include "psl/jsonl.hpp"

#include "psl/errors.hpp"

#include <fstream>

namespace psl::jsonl {

std::string tool_version() { return "0.1.0"; }

nlohmann::json make_header(const std::string& config_hash, uint64_t seed) {
    return nlohmann::json{{"_header",
                           {{"tool", "psl"},
                            {"version", tool_version()},
                            {"config_hash", config_hash},
                            {"seed", seed}}}};
}

bool is_header(const nlohmann::json& j) {
    return j.is_object() && j.contains("_header");
}

void for_each_record(const std::string& path,
                     const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (is_header(j))
            continue;
        fn(j, line_no);
    }
}

std::vector<nlohmann::json> read_file(const std::string& path) {
    std::vector<nlohmann::json> out;
    for_each_record(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(j); });
    return out;
}

void write_file(const std::string& path, const nlohmann::json& header,
                const std::vector<nlohmann::json>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path);
    out << header.dump() << "\n";
    for (const auto& r : records)
        out << r.dump() << "\n";
    if (!out)
        throw DataError("write failed for " + path);
}

} // namespace psl::jsonl
