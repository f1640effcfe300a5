#pragma once

#include <stdexcept>
#include <string>

namespace kale {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration.
class SchemaError : public Error { using Error::Error; };
class ConfigTypeError : public Error { using Error::Error; };
class FrozenError : public Error { using Error::Error; };

class ParseError : public Error {
public:
    ParseError(const std::string& what, int line) : Error(what), line_(line) {}
    /// 1-based line of the offending input, or 0 when unknown.
    int line() const noexcept { return line_; }

private:
    int line_;
};

// I/O and transfer.
class IoError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class TransferError : public Error { using Error::Error; };

// KTF container.
class FormatError : public Error { using Error::Error; };
class UnsupportedError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };

// Numerics and model state.
class ShapeError : public Error { using Error::Error; };
class ValueError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };
class NonFiniteError : public Error { using Error::Error; };

}  // namespace kale
