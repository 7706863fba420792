#pragma once

#include <stdexcept>
#include <string>

namespace newsfdi {

// Failure classes map one-to-one onto CLI exit codes.
enum class ErrorKind { config = 2, data = 3, internal = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

// Bad or unreadable input data (I/O failures included).
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

}  // namespace newsfdi
