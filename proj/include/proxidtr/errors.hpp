#pragma once

#include <stdexcept>
#include <string>

namespace proxidtr {

// Base for every failure that should map to the numerical exit code.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownVariable : std::invalid_argument {
    explicit UnknownVariable(const std::string& name)
        : std::invalid_argument("unknown variable: " + name), variable(name) {}
    std::string variable;
};

// Conditioning on an event of probability zero.
struct PositivityError : NumericalError {
    PositivityError(const std::string& what, std::string where)
        : NumericalError(what + " [" + where + "]"), assignment(std::move(where)) {}
    std::string assignment;
};

// A proxy matrix that cannot be inverted; signals a rank/completeness failure.
struct RankError : NumericalError {
    RankError(const std::string& what, std::string matrix_role)
        : NumericalError(what + " [" + matrix_role + "]"), role(std::move(matrix_role)) {}
    std::string role;
};

struct MissingBridge : std::invalid_argument {
    explicit MissingBridge(const std::string& component)
        : std::invalid_argument("bridge component not present: " + component), name(component) {}
    std::string name;
};

}  // namespace proxidtr
