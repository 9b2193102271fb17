#pragma once
#include <stdexcept>
#include <string>

namespace fconn {

struct Error : std::runtime_error {
    explicit Error(const std::string& m) : std::runtime_error(m) {}
};

// The ground field cannot represent a required value (root of unity past the
// degree cap, eigenvalue outside the field, ...).
struct FieldTooSmall : Error {
    explicit FieldTooSmall(const std::string& m) : Error("FieldTooSmall: " + m) {}
};

// A series does not carry enough known coefficients to finish an operation.
// `required` is the exponent (as a rational string) up to which input
// coefficients would be needed.
struct InsufficientPrecision : Error {
    std::string required;
    explicit InsufficientPrecision(const std::string& m, std::string req = "")
        : Error("InsufficientPrecision: " + m), required(std::move(req)) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& m) : Error("DimensionMismatch: " + m) {}
};

struct NotInvertible : Error {
    explicit NotInvertible(const std::string& m) : Error("NotInvertible: " + m) {}
};

struct NotNilpotent : Error {
    explicit NotNilpotent(const std::string& m) : Error("NotNilpotent: " + m) {}
};

struct ZeroInput : Error {
    explicit ZeroInput(const std::string& m) : Error("ZeroInput: " + m) {}
};

struct DivergentExponential : Error {
    explicit DivergentExponential(const std::string& m) : Error("DivergentExponential: " + m) {}
};

struct NotACocycle : Error {
    explicit NotACocycle(const std::string& m) : Error("NotACocycle: " + m) {}
};

struct NotRegular : Error {
    explicit NotRegular(const std::string& m) : Error("NotRegular: " + m) {}
};

struct Undecidable : Error {
    explicit Undecidable(const std::string& m) : Error("Undecidable: " + m) {}
};

struct OracleOutOfRange : Error {
    explicit OracleOutOfRange(const std::string& m) : Error("OracleOutOfRange: " + m) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("ParseError: " + m) {}
};

} // namespace fconn
