#pragma once

#include <stdexcept>
#include <string>

namespace mvh {

enum class ErrorKind {
    Parse,
    Vocabulary,
    Duplicate,
    Coverage,
    Alignment,
    Aggregation,
    Parameter,
    Undefined,
    Numeric,
    Capacity,
    Io,
};

/// Single exception type for the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

// 2 usage, 3 data validation, 4 numeric, 5 capacity.
int exit_code(ErrorKind kind) noexcept;

}  // namespace mvh
