#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tdccm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowVector = Eigen::RowVectorXcd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};

// Error hierarchy. Each class names one failure mode of the public operations.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidCutoff : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Input to an exact-diagonalization routine is not Hermitian.
class OraclePrecondition : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

// Requested SUB-N level needs boson strings beyond the Fock cutoff.
class TruncationOverflow : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// <psi0|psi> = 0, so the state has no cluster representation.
class OrthogonalReference : public Error {
public:
    using Error::Error;
};

class SingularMap : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class ObservabilityPrecondition : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double last_good_t)
        : Error(what), last_good_t_(last_good_t) {}
    [[nodiscard]] double last_good_t() const noexcept { return last_good_t_; }

private:
    double last_good_t_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace tdccm
