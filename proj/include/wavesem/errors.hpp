#pragma once

#include <stdexcept>
#include <string>

namespace wavesem {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or configuration value. `key()` names the offending input
/// (a config path such as "domain.h" or a parameter name).
class ValidationError : public Error {
public:
    ValidationError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A water column has collapsed (eta + h <= 0).
class DegenerateDomain : public Error {
public:
    using Error::Error;
};

/// Non-positive Jacobian determinant inside an element.
class TangledMesh : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class IncompatiblePeriodicData : public Error {
public:
    using Error::Error;
};

/// Matrix failed an assumed property (e.g. p^T A p <= 0 inside CG).
class MatrixPropertyError : public Error {
public:
    using Error::Error;
};

class RankDeficient : public Error {
public:
    using Error::Error;
};

/// Newton / fixed-point divergence in the wave-theory solvers.
class WaveSolverError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced during time integration.
class BlowUpError : public Error {
public:
    using Error::Error;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace wavesem
