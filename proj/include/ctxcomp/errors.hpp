#pragma once

#include <stdexcept>
#include <string>

namespace ctxcomp {

/// Caller-supplied value out of contract: bad range, missing file, malformed record.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// On-disk data failed to parse; message carries a record locator or byte offset.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A compression stage failed. Carries the name of the failing stage.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Remote gateway failure after all retries were exhausted.
class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ctxcomp
