#pragma once

#include <stdexcept>
#include <string>

namespace taxlearn {

// Argument outside the domain an operation is defined on (e.g. x outside [0,1]).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A bracketing query with no member on the requested side.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Strategy or load that violates the feasibility constraints of a game.
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Game instance rejected at construction (cost assumptions, malformed actions).
class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoPathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that contradict a documented precondition between modules.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace taxlearn
