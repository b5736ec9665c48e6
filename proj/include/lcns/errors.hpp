#pragma once

#include <stdexcept>
#include <string>

namespace lcns {

// Exit codes of the CLI follow the class: config 1, domain 2, numerical 3.
enum class ErrorClass { Config, Domain, Numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const { return cls_; }
  const std::string& kind() const { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorClass::Config, "ConfigError", message) {}
};

// kind is one of DimMismatch, MeanZeroRequired, ZeroState, DuplicateRate, InfeasibleRow,
// SupportError, NotDegenerate, CFLViolation, PreconditionViolated.
class DomainError : public Error {
 public:
  DomainError(std::string kind, const std::string& message)
      : Error(ErrorClass::Domain, std::move(kind), message) {}
};

// kind is one of ChainError, ConditioningError, IllConditioned, QuadratureNotConverged,
// RankDeficient, SolverSingular, ContractionViolated, InvariantFailed.
class NumericalError : public Error {
 public:
  NumericalError(std::string kind, const std::string& message)
      : Error(ErrorClass::Numerical, std::move(kind), message) {}
};

}  // namespace lcns
