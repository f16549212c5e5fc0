#pragma once

#include <stdexcept>
#include <string>

namespace sentcorr {

// Process exit codes, stable across releases.
enum class ExitStatus : int {
    ok = 0,
    usage = 1,
    input_format = 2,
    numerical = 3,
    io = 4,
};

class Error : public std::runtime_error {
public:
    Error(ExitStatus status, const std::string& msg)
        : std::runtime_error(msg), status_(status) {}

    ExitStatus status() const { return status_; }

private:
    ExitStatus status_;
};

inline Error usage_error(const std::string& msg) { return Error(ExitStatus::usage, msg); }
inline Error input_error(const std::string& msg) { return Error(ExitStatus::input_format, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ExitStatus::numerical, msg); }
inline Error io_error(const std::string& msg) { return Error(ExitStatus::io, msg); }

}  // namespace sentcorr
