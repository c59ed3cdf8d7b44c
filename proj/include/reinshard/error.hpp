#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reinshard {

enum class ErrorCode {
    MalformedBlock,
    InvariantBroken,
    CapacityExceeded,
    LinkMismatch,
    NoValidPair,
    UnknownPair,
    NotApplicable,
    BadSecurityLevel,
    BadParameter,
    ContractViolation,
    BadProfile,
    EmptyWindow,
    DegenerateProfile,
    EmptyValidatorSet,
    ZeroLearningRate,
    NoDelegate,
    EmptyChain,
    UnknownNode,
    ScenarioViolation,
    InvalidParty,
    IllegalState,
    PastEvent,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace reinshard
