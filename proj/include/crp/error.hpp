#pragma once

#include <stdexcept>
#include <string>

namespace crp {

enum class ErrorKind {
    EmptyYard,
    EmptyOrigin,
    StackFull,
    SameStack,
    InvalidStack,
    TargetBlocked,
    ParseError,
    UnknownTerminal,
    Infeasible,
    Deadlock,
    InternalLoop,
    BudgetExceeded,
    ConfigError,
    IoError,
    TooFewSamples,
};

const char* errorKindName(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(errorKindName(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace crp
