#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace psl::cli {

// Entry point shared by the binary and the test suites. Exit codes:
// 0 ok, 1 usage, 2 data error, 3 gateway error.
int run_cli(std::vector<std::string> args);

// Ratings CSV (item_id, rater_id, condition, score) -> agreement aggregates:
// per-condition alpha and mean, overall alpha, win/lose/tie between the
// "with" and "without" conditions.
nlohmann::json aggregate_ratings(const std::string& csv_path);

} // namespace psl::cli
