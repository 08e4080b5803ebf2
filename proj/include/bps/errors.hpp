#pragma once

#include <stdexcept>
#include <string>

namespace bps {

// Invalid configuration or violated precondition. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric failure while running (divergent integral, overflow, undefined ratio).
// The CLI maps this to exit code 3, reporting the run index when one is known.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, long long run_index = -1)
        : std::runtime_error(what), run_index(run_index)
    {}

    long long run_index;
};

}  // namespace bps
