#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace quanta {

struct SourcePos {
    int line = 0;  // 1-based; 0 means "no position"
    int col = 0;
};

enum class ErrorCode {
    Lex,
    Parse,
    Contradiction,        // conflicting identity asserted for a const name
    Divergence,           // step budget exhausted
    Type,                 // ill-typed operation (e.g. non-bool conditional)
    DivisionByZero,
    Enumeration,          // attempt to enumerate a non-enumerable infon
    UnknownReference,     // reading a name with no binding where one is required
    UnknownClass,         // allocation against an unresolvable class
    AlreadyBound,         // allocating a name that is already bound
    Immutability,         // writing a const binding
    UnrealizableCommand,  // '!' with no way to make the description true
    Effect,               // an external effect was refused
    UninitializedSequence,
    OutOfBounds,          // sequence/array index outside its extent
    MissingField,         // serialization needs a field the infon lacks
    AnchorMismatch,       // parsed stream byte differs from model literal
    PrematureEnd,         // stream ended inside a model
    Frozen,               // mutation of a frozen context
    Budget,               // expansion above the safety cap
    Usage,                // bad CLI invocation
    Io,
};

// All engine failures are thrown as QuantaError. what() is pre-formatted as
// "line:col: message" when a source position is known, bare message otherwise.
class QuantaError : public std::runtime_error {
public:
    QuantaError(ErrorCode code, std::string message, SourcePos pos = {})
        : std::runtime_error(format(message, pos)),
          code_(code),
          pos_(pos),
          message_(std::move(message)) {}

    ErrorCode code() const { return code_; }
    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    static std::string format(const std::string& message, SourcePos pos) {
        if (pos.line <= 0) return message;
        return std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + message;
    }

    ErrorCode code_;
    SourcePos pos_;
    std::string message_;
};

}  // namespace quanta
