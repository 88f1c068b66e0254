#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rfda {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class invalid_argument : public error {
public:
    using error::error;
};

class dimension_mismatch : public error {
public:
    using error::error;
};

// Training data that cannot define the requested model (e.g. one class only).
class degenerate_data : public error {
public:
    using error::error;
};

// A model file that does not belong to the source model it is paired with.
class incompatible_model : public error {
public:
    using error::error;
};

class solver_not_converged : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line)
        : error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"), line_(line) {}

    // 1-based; 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace rfda
