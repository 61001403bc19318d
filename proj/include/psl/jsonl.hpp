#pragma once

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace psl::jsonl {

// Every output file starts with a header record:
//   {"_header":{"tool":"psl","version":...,"config_hash":...,"seed":...}}
// Readers skip any record carrying the "_header" key.

nlohmann::json make_header(const std::string& config_hash, uint64_t seed);

bool is_header(const nlohmann::json& j);

// Parses each non-header line; line numbers are 1-based in error messages.
std::vector<nlohmann::json> read_file(const std::string& path);

void for_each_record(const std::string& path,
                     const std::function<void(const nlohmann::json&, std::size_t line_no)>& fn);

// Writes header + one record per line. Overwrites the target.
void write_file(const std::string& path, const nlohmann::json& header,
                const std::vector<nlohmann::json>& records);

std::string tool_version();

} // namespace psl::jsonl
