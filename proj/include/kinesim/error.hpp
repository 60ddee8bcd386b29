#pragma once

#include <stdexcept>
#include <string>

namespace kinesim {

/// Stable error categories. The numeric values double as wire codes in the
/// TCP protocol and map onto CLI exit statuses.
enum class ErrorCode {
    invalid_argument = 400,
    not_found = 404,
    method_not_found = 405,
    invalid_state = 409,
    internal = 500,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace kinesim
