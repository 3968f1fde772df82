#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace frontforge {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Central-difference stencil leaves the domain and no analytic derivative exists.
class InsufficientStencil : public Error {
public:
    using Error::Error;
};

/// Evaluation at a φ-singular point where a regular point is required.
class RegularityError : public Error {
public:
    using Error::Error;
};

/// Two tangent vectors that must span a plane are dependent.
class DegeneratePlaneError : public Error {
public:
    using Error::Error;
};

class RankError : public Error {
public:
    using Error::Error;
};

class ClassificationError : public Error {
public:
    using Error::Error;
};

/// A quantity that must lie in a subspace does not, beyond tolerance.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Structure-group constraint violated beyond repair (step too large).
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Nonlinear solver failed; carries the last iterate.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, Eigen::MatrixXd last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}

    const Eigen::MatrixXd& last_iterate() const { return last_iterate_; }

private:
    Eigen::MatrixXd last_iterate_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace frontforge
