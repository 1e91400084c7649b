#pragma once

#include <stdexcept>
#include <string>

namespace warmstart {

// Bad input: dimension mismatch, out-of-range argument, malformed text.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string &what) : std::invalid_argument(what) {}
};

// Computation produced something unusable (underflow, NaN, line-search failure).
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

#define WS_REQUIRE(cond, msg)                                                  \
    do {                                                                       \
        if (!(cond))                                                           \
            throw ::warmstart::ValidationError(msg);                           \
    } while (0)

} // namespace warmstart
