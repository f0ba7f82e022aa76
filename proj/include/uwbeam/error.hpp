#pragma once

#include <stdexcept>
#include <string>

namespace uwbeam {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Primitive polynomial taps did not produce a maximal-length register.
class InvalidPolynomial : public Error {
public:
    using Error::Error;
};

class OutOfBounds : public Error {
public:
    using Error::Error;
};

/// Null-steering constraint system was rank deficient at some bin.
class SingularDesign : public Error {
public:
    SingularDesign(const std::string& what, std::size_t bin) : Error(what), bin_(bin) {}
    std::size_t bin() const noexcept { return bin_; }

private:
    std::size_t bin_;
};

class SyncFailure : public Error {
public:
    using Error::Error;
};

class TruncatedFrame : public Error {
public:
    using Error::Error;
};

class Divergence : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Wraps a lower-level failure with the pipeline stage it happened in.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace uwbeam
