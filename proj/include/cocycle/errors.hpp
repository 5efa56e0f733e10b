#pragma once

#include <stdexcept>
#include <string>

namespace cocycle {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside an operation's precondition.
class input_error : public error {
public:
    using error::error;
};

/// Mathematically undefined request, e.g. a negative power of a zero singular value.
class domain_error : public error {
public:
    using error::error;
};

/// Floating point breakdown (overflow, conditioning).
class numeric_error : public error {
public:
    using error::error;
};

/// Enumeration would exceed the configured leaf budget.
class resource_error : public error {
public:
    using error::error;
};

/// Malformed cocycle file.
class parse_error : public error {
public:
    using error::error;
};

/// Well-formed input violating a semantic invariant (singular generator, shape mismatch).
class validation_error : public error {
public:
    using error::error;
};

} // namespace cocycle
