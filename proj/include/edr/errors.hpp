#ifndef EDR_ERRORS_HPP
#define EDR_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edr {

/// Base type for all library errors. Carries a mutable message so callers
/// higher up the stack (e.g. the cross-validation loop) can prepend context
/// such as the fold index without losing the concrete error type.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message)
        : std::runtime_error(message), message_(std::move(message)) {}

    const char* what() const noexcept override { return message_.c_str(); }

    void add_context(const std::string& context) {
        message_ = context + ": " + message_;
    }

private:
    std::string message_;
};

/// Input values violate a structural requirement (non-finite entries,
/// asymmetric matrix handed to a symmetric routine, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A parameter is outside its documented domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// An iterative routine failed to converge.
class NumericalFailure : public Error {
public:
    NumericalFailure(std::string message, int iterations)
        : Error(std::move(message)), iterations_(iterations) {}

    int iterations() const { return iterations_; }

private:
    int iterations_ = 0;
};

/// A matrix required to be symmetric positive definite is not. The pivot
/// index identifies the first Cholesky step that broke down.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::string message, std::size_t pivot_index)
        : Error(std::move(message)), pivot_index_(pivot_index) {}

    std::size_t pivot_index() const { return pivot_index_; }

private:
    std::size_t pivot_index_ = 0;
};

/// Too few samples overall for the requested estimate.
class InsufficientData : public Error {
public:
    using Error::Error;
};

/// A specific class has too few samples. Carries the offending class index.
class InsufficientClassData : public Error {
public:
    InsufficientClassData(std::string message, int class_index)
        : Error(std::move(message)), class_index_(class_index) {}

    int class_index() const { return class_index_; }

private:
    int class_index_ = 0;
};

/// Matrix/vector dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// An operation over a set of rows found the set empty.
class EmptySet : public Error {
public:
    using Error::Error;
};

/// CSV or JSON input could not be parsed. Row/column are 1-based where known
/// (0 means unknown).
class ParseError : public Error {
public:
    explicit ParseError(std::string message, std::size_t row = 0, std::size_t column = 0)
        : Error(std::move(message)), row_(row), column_(column) {}

    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_ = 0;
    std::size_t column_ = 0;
};

/// The synthetic generator cannot satisfy the requested configuration.
class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace edr

#endif  // EDR_ERRORS_HPP
