#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "aoi/age_state.hpp"
#include "aoi/params.hpp"
#include "aoi/table.hpp"

namespace aoi {

inline constexpr std::uint64_t kDefaultStateBudget = 5'000'000;

struct Transition {
  std::uint64_t to;
  double prob;
};

// Exact one-step kernel of the age-state process, truncated at v1 <= n_cap.
// Aging past the cap clamps component i at n_cap - i + 1 (strict descent is
// preserved, deliveries and resets stay exact), so every row sums to 1.
// Successor lists are computed from the transition rules on demand; nothing is
// materialized unless asked for.
class TransitionKernel {
 public:
  TransitionKernel(ModelSpec model, int n_cap,
                   std::uint64_t state_budget = kDefaultStateBudget);

  const ModelSpec& model() const { return model_; }
  const AgeStateSpace& space() const { return space_; }
  int n_cap() const { return space_.n_cap(); }
  std::uint64_t state_count() const { return space_.size(); }

  void successors(const AgeState& s,
                  std::vector<std::pair<AgeState, double>>& out) const;
  void successors(std::uint64_t rank, std::vector<Transition>& out) const;
  double row_sum(const AgeState& s) const;

  // "state -> successor prob" lines, 17 significant digits, rank order.
  void dump(std::ostream& os) const;

  // Precomputed service data for the size-1 general model.
  double survive(int age) const;     // Pr{B > age | B > age - 1}
  double preempt_prob(int m) const;  // p * g(m)

 private:
  ModelSpec model_;
  AgeStateSpace space_;
  std::vector<double> survive_;  // survive_[a], a in [1, n_cap]
  std::vector<double> preempt_;  // preempt_[m] = p * g(m), m in [1, n_cap]
};

// Explicit row-stochastic matrix in CSR form, for small chains and tests.
struct SparseKernel {
  std::uint64_t n = 0;
  std::vector<std::uint64_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  static SparseKernel from_dense(const std::vector<std::vector<double>>& rows);
};

SparseKernel materialize(const TransitionKernel& kernel);

enum class SolveMethod { Auto, Power, GaussSeidel, Direct };

struct SolveOptions {
  double tol = 1e-12;
  long max_iters = 200000;
  SolveMethod method = SolveMethod::Auto;
  bool compute_residual = true;
};

struct VectorSolveResult {
  std::vector<double> pi;
  double residual = 0.0;
  long iterations = 0;
  bool converged = true;
  std::string note;
};

// Power iteration (or sparse-LU debug solve) on an explicit kernel.
VectorSolveResult solve_stationary(const SparseKernel& kernel,
                                   const SolveOptions& options = {});

// Stationary distribution of the truncated age chain. Auto picks power
// iteration for small chains and level-ordered Gauss-Seidel sweeps for large
// ones; both converge to the same fixed point and the reported residual
// ||pi P - pi||_1 is always measured against the exact kernel rules.
StationaryTable solve_stationary(const TransitionKernel& kernel,
                                 const SolveOptions& options = {});

}  // namespace aoi
