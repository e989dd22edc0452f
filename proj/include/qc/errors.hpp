#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qc {

/// Base of all domain failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A volume matched neither canonical cell volume; the cell data is corrupt.
class UnclassifiableVolume : public Error {
public:
    explicit UnclassifiableVolume(double volume);
    double volume() const noexcept { return volume_; }

private:
    double volume_;
};

/// The 3x3 plane system could not be solved (only possible with a corrupted basis).
class SingularMatrix : public Error {
public:
    using Error::Error;
};

/// No convention in the search space reproduces the reference cells.
class CalibrationFailed : public Error {
public:
    using Error::Error;
};

/// Welding merged vertices of a single cell.
class WeldToleranceTooCoarse : public Error {
public:
    WeldToleranceTooCoarse(std::size_t cell_id, double tolerance);
    std::size_t cell_id() const noexcept { return cell_id_; }

private:
    std::size_t cell_id_;
};

/// Position of a token in a text stream (1-based line and column).
struct SourceLocation {
    std::size_t line = 0;
    std::size_t column = 0;
    std::size_t token = 0;   ///< 0-based ordinal of the token in the stream
    std::size_t record = 0;  ///< 1-based record number
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, SourceLocation where);
    const SourceLocation& where() const noexcept { return where_; }

private:
    SourceLocation where_;
};

class TokenCountMismatch : public ParseError {
public:
    using ParseError::ParseError;
};

class MalformedNumber : public ParseError {
public:
    using ParseError::ParseError;
};

class TailInvalid : public ParseError {
public:
    using ParseError::ParseError;
};

}  // namespace qc
