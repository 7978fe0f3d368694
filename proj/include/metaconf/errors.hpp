#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace metaconf {

enum class ErrorCode {
    InvalidArgument,
    IoError,
    FormatError,
    DegenerateLabels,
    StaleProbe,
    ConfigError,
    IncompatibleArtifact,
    TrainingDiverged,
    Internal,
};

/// Single exception type for the whole library; the code maps 1:1 onto the
/// C API status values.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace metaconf
