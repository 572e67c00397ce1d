#pragma once

#include <stdexcept>
#include <string>

namespace edgeplan {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FileNotFound : Error {
    explicit FileNotFound(const std::string& path) : Error("file not found: " + path) {}
};

struct ParseError : Error {
    ParseError(const std::string& what, std::size_t byte_pos)
        : Error("parse error at byte " + std::to_string(byte_pos) + ": " + what) {}
    explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};

struct ValidationError : Error {
    ValidationError(const std::string& field_, const std::string& reason_)
        : Error("validation error: " + field_ + ": " + reason_), field(field_), reason(reason_) {}
    std::string field;
    std::string reason;
};

struct InvalidPlan : Error {
    explicit InvalidPlan(const std::string& reason) : Error("invalid plan: " + reason) {}
};

struct AdvisorUnreachable : Error {
    using Error::Error;
};

struct TransportError : Error {
    using Error::Error;
};

struct TimeoutError : Error {
    using Error::Error;
};

struct MalformedReply : Error {
    explicit MalformedReply(const std::string& raw)
        : Error("malformed advisor reply: " + raw.substr(0, 200)), raw_text(raw) {}
    std::string raw_text;
};

struct EmptyDataset : Error {
    EmptyDataset() : Error("empty dataset") {}
};

struct EmptyInput : Error {
    EmptyInput() : Error("empty input") {}
};

struct UnknownSymbol : Error {
    explicit UnknownSymbol(int sym) : Error("symbol outside model alphabet: " + std::to_string(sym)) {}
};

struct UnknownArch : Error {
    explicit UnknownArch(const std::string& arch) : Error("unknown architecture: " + arch) {}
};

struct ArchMismatch : Error {
    ArchMismatch() : Error("models have mismatched architectures") {}
};

struct InvalidSplit : Error {
    InvalidSplit(int split, int n_layers)
        : Error("split " + std::to_string(split) + " outside [0, " + std::to_string(n_layers) + "]") {}
};

struct UnresolvableStep : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

} // namespace edgeplan
