#pragma once

#include <stdexcept>
#include <string>

namespace fedsel {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scenario, dataset or algorithm parameters. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function (negative distance, reward > 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Arm space too large to enumerate.
class ScalabilityError : public Error {
 public:
  using Error::Error;
};

class GroupingError : public Error {
 public:
  using Error::Error;
};

// An index was requested for an arm or client that has never been pulled.
class UninitializedArmError : public Error {
 public:
  using Error::Error;
};

// A gap-dependent quantity was requested but every arm has the optimal mean.
class UndefinedGapError : public Error {
 public:
  using Error::Error;
};

class DegenerateBeliefError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Gossip cannot converge on a disconnected graph.
class AgreementError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedsel
