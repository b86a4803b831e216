#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

// Base for every error the library raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameters outside their admissible range (probabilities, sizes, counts).
struct InvalidParams : Error {
  using Error::Error;
};

// p >= gamma requested for a model with a buffer; the queue has no steady state.
struct Unstable : Error {
  using Error::Error;
};

// |gamma - p| below the cutoff where the closed forms divide by gamma - p.
struct NearSingular : Error {
  using Error::Error;
};

// An age vector violating the strict-descent / trailing-zero invariants.
struct InvalidState : Error {
  using Error::Error;
};

// Root-coefficient linear system too ill-conditioned to trust.
struct IllConditioned : Error {
  using Error::Error;
};

// A normalization series failed to converge within the truncation budget.
struct NonNormalizable : Error {
  using Error::Error;
};

// Kernel construction would enumerate more states than the configured budget.
struct StateSpaceTooLarge : Error {
  using Error::Error;
};

// Conditional marginal requested on an event of zero probability.
struct EmptyCondition : Error {
  using Error::Error;
};

// Total-variation distance between PMFs with different support offsets.
struct MismatchedSupport : Error {
  using Error::Error;
};

}  // namespace aoi
