#pragma once

#include <stdexcept>
#include <string>

namespace motive {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

    /// Process exit code used by the command-line front end.
    virtual int exit_code() const noexcept { return 1; }

private:
    std::string kind_;
};

/// Mathematical failure: divergence, threshold, degenerate input.
class MathError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class InfiniteMeasure : public MathError {
public:
    explicit InfiniteMeasure(const std::string& w) : MathError("InfiniteMeasure", w) {}
};

class NotIntegrable : public MathError {
public:
    explicit NotIntegrable(const std::string& w) : MathError("NotIntegrable", w) {}
};

class Divergent : public MathError {
public:
    explicit Divergent(const std::string& w) : MathError("Divergent", w) {}
};

class ThresholdViolation : public MathError {
public:
    explicit ThresholdViolation(const std::string& w) : MathError("ThresholdViolation", w) {}
};

class DenominatorVanishes : public MathError {
public:
    explicit DenominatorVanishes(const std::string& w) : MathError("DenominatorVanishes", w) {}
};

class UnsupportedFormula : public MathError {
public:
    explicit UnsupportedFormula(const std::string& w) : MathError("UnsupportedFormula", w) {}
};

class DegenerateCenters : public MathError {
public:
    explicit DegenerateCenters(const std::string& w) : MathError("DegenerateCenters", w) {}
};

class NoFit : public MathError {
public:
    explicit NoFit(const std::string& w) : MathError("NoFit", w) {}
};

class InvalidArgument : public MathError {
public:
    explicit InvalidArgument(const std::string& w) : MathError("InvalidArgument", w) {}
};

class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& w) : Error("BudgetExceeded", w) {}
    int exit_code() const noexcept override { return 4; }
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t col, std::string expected)
        : Error("SyntaxError", "syntax error at " + std::to_string(line) + ":" +
                                   std::to_string(col) + ": expected " + expected),
          line_(line), col_(col), expected_(std::move(expected)) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return col_; }
    const std::string& expected() const noexcept { return expected_; }
    int exit_code() const noexcept override { return 2; }

private:
    std::size_t line_;
    std::size_t col_;
    std::string expected_;
};

} // namespace motive
