#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lbe {

// Malformed expression text. position() is the 0-based offset into the input.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& message, std::size_t position)
        : std::runtime_error(message + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Division by zero or an unbound variable during strict evaluation.
class evaluation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Expression outside the polynomial subset (division, sin, cos).
class unsupported_form_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model definition problems: bad lags, wrong initial count, inequivalent extensions,
// malformed model files.
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Not enough data to select a window or fit a slope.
class fit_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lbe
