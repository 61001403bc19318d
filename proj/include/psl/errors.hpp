#pragma once

#include <stdexcept>
#include <string>

namespace psl {

// Exit-code mapping: UsageError -> 1, DataError -> 2, GatewayError -> 3.

class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failure of a model response; carries the raw text so callers can retry.
class ParseError : public DataError {
public:
    ParseError(const std::string& msg, std::string raw)
        : DataError(msg), raw_(std::move(raw)) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

class GatewayError : public std::runtime_error {
public:
    explicit GatewayError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace psl
