#pragma once

#include <stdexcept>
#include <string>

namespace focalize {

// Base of everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent input data (exit code 2 in the CLI).
class DataError : public Error {
public:
    using Error::Error;
};

// Remote backend trouble (exit code 3 in the CLI).
class BackendError : public Error {
public:
    using Error::Error;
};

class EmptyDocument : public DataError {
public:
    using DataError::DataError;
};

class SampleTooLarge : public DataError {
public:
    using DataError::DataError;
};

class SchemaError : public DataError {
public:
    SchemaError(const std::string& msg, std::size_t line)
        : DataError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateRecord : public DataError {
public:
    using DataError::DataError;
};

class UnknownLabel : public DataError {
public:
    UnknownLabel(const std::string& msg, std::size_t line)
        : DataError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class AllInvalid : public DataError {
public:
    using DataError::DataError;
};

class EmptyVocabulary : public DataError {
public:
    using DataError::DataError;
};

class EmptyTrainingSet : public DataError {
public:
    using DataError::DataError;
};

class SingleClassTraining : public DataError {
public:
    using DataError::DataError;
};

class NoOverlap : public DataError {
public:
    using DataError::DataError;
};

class ZeroVariance : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class InsufficientData : public DataError {
public:
    using DataError::DataError;
};

class NoLexiconMatches : public DataError {
public:
    using DataError::DataError;
};

class InvalidLogprob : public DataError {
public:
    using DataError::DataError;
};

class UnknownPrompt : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

class HttpError : public BackendError {
public:
    HttpError(const std::string& msg, int status = 0) : BackendError(msg), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class MalformedResponse : public BackendError {
public:
    using BackendError::BackendError;
};

class AuthError : public BackendError {
public:
    using BackendError::BackendError;
};

}  // namespace focalize
