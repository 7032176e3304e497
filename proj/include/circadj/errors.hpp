#pragma once

#include <stdexcept>
#include <string>

namespace circadj {

/// Malformed or inconsistent circuit input. Carries the 1-based source
/// location when the error originates in netlist text (0 when unknown).
class InputError : public std::runtime_error {
public:
    InputError(const std::string& message, int line = 0, int column = 0)
        : std::runtime_error(format(message, line, column)), line_(line), column_(column) {}

    [[nodiscard]] int line() const { return line_; }
    [[nodiscard]] int column() const { return column_; }

private:
    static std::string format(const std::string& message, int line, int column) {
        if (line <= 0) return message;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message;
    }

    int line_;
    int column_;
};

/// Numerical failure inside a solver (singular matrix, Newton divergence).
/// `step` is the grid index at which the failure happened, or -1.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& message, long step = -1)
        : std::runtime_error(step < 0 ? message : message + " (step " + std::to_string(step) + ")"),
          step_(step) {}

    [[nodiscard]] long step() const { return step_; }

private:
    long step_;
};

}  // namespace circadj
