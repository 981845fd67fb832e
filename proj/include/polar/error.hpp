#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace polar {

// Base of every domain error raised by the library. The CLI maps any Error
// to exit status 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RejectedInput : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

    std::optional<std::size_t> line() const { return line_; }

private:
    std::optional<std::size_t> line_;
};

class EncoderUnavailable : public Error {
public:
    using Error::Error;
};

class DistillerUnavailable : public Error {
public:
    using Error::Error;
};

class PlannerUnavailable : public Error {
public:
    using Error::Error;
};

class GroundingFailed : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

}  // namespace polar
