#pragma once

// Internal raw-tuple transition machinery shared by the kernel and the
// solvers. States are int32 tuples of fixed dimension; successor generation
// never allocates.

#include <array>
#include <cstdint>

#include "aoi/chain.hpp"

namespace aoi::detail {

inline constexpr int kMaxDim = 12;
inline constexpr int kMaxSucc = 4;

struct RawSuccessors {
  int count = 0;
  std::array<std::array<std::int32_t, kMaxDim>, kMaxSucc> to{};
  std::array<double, kMaxSucc> prob{};
};

// One-step successors of v (dimension = kernel dimension), clamp included.
void successors_raw(const TransitionKernel& kernel, const std::int32_t* v,
                    RawSuccessors& out);

// Rank without validation; v must be a valid state of the space.
std::uint64_t rank_raw(const AgeStateSpace& space, const std::int32_t* v);

// y = pi P for the structural kernel; y must have space.size() entries.
void apply_kernel(const TransitionKernel& kernel, const double* pi, double* y);

// ||pi P - pi||_1 measured against the exact kernel rules.
double kernel_residual(const TransitionKernel& kernel, const double* pi);

}  // namespace aoi::detail
