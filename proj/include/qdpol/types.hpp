/// @file types.hpp
/// @brief Common Eigen aliases, unit constants and the error hierarchy

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qdpol
{

using Index = Eigen::Index;
using Complex = std::complex<double>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Atomic units of time per femtosecond. Times are a.u. internally; fs only at I/O.
inline constexpr double AuPerFs = 41.341374575751;

inline constexpr double fs_to_au(double fs) { return fs * AuPerFs; }
inline constexpr double au_to_fs(double au) { return au / AuPerFs; }

/// Base of every error raised by the engine
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Eigensolver or integrator failure, non-finite values
class NumericalError : public Error
{
public:
	using Error::Error;
};

/// Two states closer in energy than the degeneracy guard
class DegeneracyError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

/// Overlap between consecutive bases too far from orthogonal (step too large)
class BasisBreakdownError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

/// Phase alignment against a reference set failed
class ContinuityError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

/// Argument outside the domain of an operation
class DomainError : public Error
{
public:
	using Error::Error;
};

/// Incompatible shapes or grids
class ShapeError : public Error
{
public:
	using Error::Error;
};

/// Malformed or inconsistent configuration
class ConfigError : public Error
{
public:
	using Error::Error;
};

} // namespace qdpol
