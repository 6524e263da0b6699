#ifndef PVSTAT_ERRORS_HPP
#define PVSTAT_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace pvstat {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input: a parameter violates a documented precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A vortex position lies outside the closed domain.
class DomainViolation : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Two vortices (or a vortex and a box center) coincide, so a log-energy is infinite.
class SingularConfiguration : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Inverse temperature outside the configured admissible window.
class AdmissibilityError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class EnumerationTooLarge : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

class NormalizationError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// Free energy -(1/beta) log Z requested at beta == 0.
class UndefinedFreeEnergy : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

/// An iterative solver or a quadrature failed to reach its tolerance.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

class IterationLimit : public ConvergenceError {
public:
  IterationLimit(const std::string& what, std::string trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}

  /// Residual history, one value per line.
  const std::string& trace() const noexcept { return trace_; }

private:
  std::string trace_;
};

class OracleUnconverged : public ConvergenceError {
public:
  OracleUnconverged(const std::string& what, double coarse, double fine)
      : ConvergenceError(what), coarse_(coarse), fine_(fine) {}

  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

private:
  double coarse_;
  double fine_;
};

} // namespace pvstat

#endif // PVSTAT_ERRORS_HPP
