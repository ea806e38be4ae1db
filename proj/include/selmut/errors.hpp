#pragma once

#include <stdexcept>
#include <string>

namespace selmut {

// Thrown when a requested integral moment does not exist (|a| >= 1 for the
// exponential-tail moments).
struct DivergentMomentError : std::domain_error {
  explicit DivergentMomentError(const std::string& what) : std::domain_error(what) {}
};

// Thrown when a simulation step would evaluate exp() outside the safe range,
// i.e. the rescaled field developed slopes incompatible with the scaling.
struct SlopeBlowupError : std::runtime_error {
  explicit SlopeBlowupError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the time integrator cannot reach the requested tolerance
// (step size underflow, non-finite right-hand side, ...).
struct IntegrationError : std::runtime_error {
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace selmut
