#pragma once

#include <stdexcept>
#include <string>

namespace k3char {

/// Precondition violated by the caller (bad argument, malformed input).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A configured effort budget was exhausted (enumeration cap, factoring effort).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The mathematics refuses: undefined symbol, unsupported case, inconsistent data.
class MathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal consistency check failed; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace k3char
