#pragma once

#include <stdexcept>
#include <string>

namespace parabest {

/// Raised for violated preconditions on arguments (bad counts, unknown ids).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Two triangulations that do not descend from the same macro-triangulation.
class IncompatibleMeshes : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedDegree : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedOrder : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Transfer requested into a space that does not contain the source space.
class NonNestedTransfer : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class OutsideDomain : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Factorization failed (matrix not SPD) or the residual check did not pass.
class SolverFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (mesh dumps, checkpoints, config files).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace parabest
