#pragma once

#include <stdexcept>
#include <string>

namespace cmdp {

/// Invalid model, configuration, policy literal or violated precondition.
class ModelError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A policy with zero aggregate service rate at some busy state.
class NonErgodicPolicyError : public ModelError {
  public:
    using ModelError::ModelError;
};

/// A computation that could not produce a certified answer: instability,
/// truncation cap, singular truncated system, non-convergence.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The policy has no stability certificate (the drift condition fails in the tail).
class UnstablePolicyError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Enumeration cardinality exceeds the configured cap.
class SearchSpaceError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

} // namespace cmdp
