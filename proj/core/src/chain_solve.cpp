#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "aoi/chain.hpp"
#include "chain_detail.hpp"

namespace aoi {

namespace {

constexpr std::uint64_t kPowerAutoLimit = 250'000;
constexpr std::uint64_t kDirectLimit = 50'000;

double l1_normalize(std::vector<double>& v) {
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0)
    for (double& x : v) x /= s;
  return s;
}

// ---------------------------------------------------------------------------
// Explicit-kernel solvers
// ---------------------------------------------------------------------------

VectorSolveResult power_iterate(const SparseKernel& k, const SolveOptions& opt) {
  const std::uint64_t n = k.n;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), nxt(n);
  VectorSolveResult res;
  res.converged = false;
  for (long it = 1; it <= opt.max_iters; ++it) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::uint64_t i = 0; i < n; ++i) {
      double w = pi[i];
      if (w == 0.0) continue;
      for (std::uint64_t e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e)
        nxt[k.col[e]] += w * k.val[e];
    }
    l1_normalize(nxt);
    double delta = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) delta += std::abs(nxt[i] - pi[i]);
    pi.swap(nxt);
    res.iterations = it;
    if (it == 1 && delta == 0.0)
      res.note = "zero progress from the uniform start; the chain may be reducible "
                 "with multiple stationary vectors";
    if (delta < opt.tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged && res.note.empty())
    res.note = "power iteration hit max_iters before the tolerance";
  if (opt.compute_residual) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (std::uint64_t i = 0; i < n; ++i)
      for (std::uint64_t e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e)
        nxt[k.col[e]] += pi[i] * k.val[e];
    double r = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) r += std::abs(nxt[i] - pi[i]);
    res.residual = r;
  }
  res.pi = std::move(pi);
  return res;
}

VectorSolveResult direct_solve(const SparseKernel& k, const SolveOptions& opt) {
  if (k.n > kDirectLimit)
    throw InvalidParams("direct solve is a debug path capped at 50k states");
  const int n = static_cast<int>(k.n);
  // (P^T - I) pi = 0 with the last balance row swapped for sum(pi) = 1.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(k.val.size() + 2 * k.n);
  for (int i = 0; i < n; ++i) {
    for (std::uint64_t e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e) {
      int j = static_cast<int>(k.col[e]);
      if (j == n - 1) continue;
      trip.emplace_back(j, i, k.val[e]);
    }
    if (i != n - 1) trip.emplace_back(i, i, -1.0);
    trip.emplace_back(n - 1, i, 1.0);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw Error("direct solve: factorization failed");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw Error("direct solve: back substitution failed");

  VectorSolveResult res;
  res.pi.assign(x.data(), x.data() + n);
  for (double& v : res.pi) v = std::max(v, 0.0);
  l1_normalize(res.pi);
  res.iterations = 1;
  res.converged = true;
  if (opt.compute_residual) {
    std::vector<double> y(k.n, 0.0);
    for (std::uint64_t i = 0; i < k.n; ++i)
      for (std::uint64_t e = k.row_ptr[i]; e < k.row_ptr[i + 1]; ++e)
        y[k.col[e]] += res.pi[i] * k.val[e];
    double r = 0.0;
    for (std::uint64_t i = 0; i < k.n; ++i) r += std::abs(y[i] - res.pi[i]);
    res.residual = r;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Gauss-Seidel sweep engines.
//
// One sweep walks the states in rank order (shape-major, level-major inside a
// shape, colex inside a level). Aging inflow reads values already written this
// sweep; delivery inflow reads the previous sweep's column sums, which are
// double-buffered and rebuilt while sweeping. Everything is renormalized at
// the end of each sweep, so the fixed point is the exact stationary vector of
// the clamped kernel; the convergence metric is the L1 change per sweep plus
// the mass drift.
// ---------------------------------------------------------------------------

// Aging preimages under the clamp for a target prefix w[0..len) at the top
// level (w[0] == n_cap). Component i came from w[i] - 1, or stayed at w[i]
// when w[i] sits at its cap n_cap - i. Calls f(pred_tuple) per valid preimage.
template <typename F>
void for_each_aging_preimage(const std::int32_t* w, int len, int n_cap, F&& f) {
  std::int32_t pred[detail::kMaxDim];
  int stay_pos[detail::kMaxDim];
  int n_stay = 0;
  for (int i = 0; i < len; ++i) {
    pred[i] = w[i] - 1;
    if (w[i] == n_cap - i) stay_pos[n_stay++] = i;
  }
  for (int mask = 0; mask < (1 << n_stay); ++mask) {
    for (int b = 0; b < n_stay; ++b)
      pred[stay_pos[b]] = (mask >> b) & 1 ? w[stay_pos[b]] : w[stay_pos[b]] - 1;
    bool ok = pred[len - 1] >= 1;
    for (int i = 1; ok && i < len; ++i) ok = pred[i] < pred[i - 1];
    if (ok) f(static_cast<const std::int32_t*>(pred));
  }
}

struct GsScratch {
  long sweeps = 0;
  double delta = 0.0;
  bool converged = false;
};

template <typename SweepFn>
GsScratch gs_run(const SolveOptions& opt, SweepFn&& sweep) {
  GsScratch out;
  for (long it = 1; it <= opt.max_iters; ++it) {
    out.delta = sweep();
    out.sweeps = it;
    if (out.delta < opt.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---- dim-2 engine: Ber/G/1/1 family (plain geometric is the g = 0 case) ----
GsScratch gs_dim2(const TransitionKernel& K, std::vector<double>& pi,
                  const SolveOptions& opt) {
  const AgeStateSpace& sp = K.space();
  const int N = sp.n_cap();
  const double p = K.model().params().p();
  const double q1 = K.model().service().q1();
  const std::uint64_t off2 = sp.shape_offset(2);

  std::vector<double> keep(N + 1), surv(N + 1), haz(N + 1), pg(N + 1);
  for (int a = 1; a <= N; ++a) {
    pg[a] = K.preempt_prob(a);       // p * g(a)
    keep[a] = 1.0 - pg[a];
    surv[a] = K.survive(a);          // Pr{B > a | B > a-1}
    haz[a] = 1.0 - surv[a];
  }

  std::vector<double> f_old(N, 0.0), f_new(N, 0.0);  // f[a] = sum_k pi(k, a)
  double gp_old = 0.0;                               // sum pi(n,m) p g(m)
  double ps_top_old = 0.0;                           // level-N preempt sum

  {
    std::uint64_t idx = 0;
    for (int t = 1; t <= N; ++t) f_old[0] += pi[idx++];
    for (int t = 2; t <= N; ++t)
      for (int m = 1; m < t; ++m, ++idx) {
        f_old[m] += pi[idx];
        gp_old += pi[idx] * pg[m];
        if (t == N) ps_top_old += pi[idx] * pg[m];
      }
  }

  auto sweep = [&]() -> double {
    std::fill(f_new.begin(), f_new.end(), 0.0);
    double gp_new = 0.0, ps_top_new = 0.0, sum = 0.0, delta = 0.0;
    double ps_prev = 0.0;

    std::uint64_t idx = 0;
    double prev = 0.0;
    for (int t = 1; t <= N; ++t, ++idx) {
      double v;
      if (t == 1) {
        v = q1 * (p * f_old[0] + gp_old);
      } else {
        v = (1.0 - p) * prev + keep[t - 1] * haz[t - 1] * f_old[t - 1];
        if (t == N) v += (1.0 - p) * pi[idx];  // clamped self-stay
      }
      delta += std::abs(v - pi[idx]);
      pi[idx] = v;
      prev = v;
      f_new[0] += v;
      sum += v;
    }

    std::uint64_t lvl_prev = off2;  // base rank of the previous (t, .) block
    for (int t = 2; t <= N; ++t) {
      double ps_cur = 0.0;
      const bool top = t == N;
      const double pi_t1_0 = pi[t - 2];
      const double pi_t_0 = top ? pi[N - 1] : 0.0;
      std::uint64_t base = idx;
      for (int m = 1; m < t; ++m, ++idx) {
        double v;
        if (m == 1) {
          v = p * (1.0 - q1) * pi_t1_0 + (1.0 - q1) * ps_prev;
          if (top) v += p * (1.0 - q1) * pi_t_0 + (1.0 - q1) * ps_top_old;
        } else {
          v = keep[m - 1] * surv[m - 1] * pi[lvl_prev + m - 2];
          if (top) {
            if (m < N - 1)
              v += keep[m - 1] * surv[m - 1] * pi[idx - 1];
            else  // m == N-1: extra preds (N, N-2) and the corner (N, N-1)
              v += keep[N - 2] * surv[N - 2] * pi[idx - 1] +
                   keep[N - 1] * surv[N - 1] * pi[idx];
          }
        }
        delta += std::abs(v - pi[idx]);
        pi[idx] = v;
        f_new[m] += v;
        gp_new += v * pg[m];
        ps_cur += v * pg[m];
        sum += v;
      }
      ps_prev = ps_cur;
      if (top) ps_top_new = ps_cur;
      lvl_prev = base;
    }

    double inv = 1.0 / sum;
    for (double& x : pi) x *= inv;
    for (double& x : f_new) x *= inv;
    gp_new *= inv;
    ps_top_new *= inv;
    f_old.swap(f_new);
    gp_old = gp_new;
    ps_top_old = ps_top_new;
    return delta + std::abs(1.0 - sum);
  };

  return gs_run(opt, sweep);
}

// ---- dim-3 engine: Ber/Geo/1/2 ----
GsScratch gs_geo12(const TransitionKernel& K, std::vector<double>& pi,
                   const SolveOptions& opt) {
  const AgeStateSpace& sp = K.space();
  const int N = sp.n_cap();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();
  const std::uint64_t off2 = sp.shape_offset(2), off3 = sp.shape_offset(3);
  auto c2 = [&](int n) { return sp.choose(n, 2); };
  auto c3 = [&](int n) { return sp.choose(n, 3); };
  auto pair_rank = [&](int a, int b) { return c2(a - 1) + (b - 1); };  // a > b >= 1

  double f0_old = 0.0;
  std::vector<double> f1_old(N, 0.0), f1_new(N, 0.0);
  std::vector<double> f2_old(c2(N - 1), 0.0), f2_new(f2_old.size(), 0.0);

  {
    std::uint64_t idx = 0;
    for (int t = 1; t <= N; ++t) f0_old += pi[idx++];
    for (int t = 2; t <= N; ++t)
      for (int m = 1; m < t; ++m, ++idx) f1_old[m] += pi[idx];
    for (int t = 3; t <= N; ++t)
      for (int m = 2; m < t; ++m)
        for (int l = 1; l < m; ++l, ++idx) f2_old[pair_rank(m, l)] += pi[idx];
  }

  auto sweep = [&]() -> double {
    double f0_new = 0.0, sum = 0.0, delta = 0.0;
    std::fill(f1_new.begin(), f1_new.end(), 0.0);
    std::fill(f2_new.begin(), f2_new.end(), 0.0);
    auto put = [&](std::uint64_t idx, double v) {
      delta += std::abs(v - pi[idx]);
      pi[idx] = v;
      sum += v;
    };

    for (int t = 1; t <= N; ++t) {
      std::uint64_t idx = t - 1;
      double v;
      if (t == 1)
        v = p * g * f0_old;
      else {
        v = (1.0 - p) * pi[idx - 1] + (1.0 - p) * g * f1_old[t - 1];
        if (t == N) v += (1.0 - p) * pi[idx];
      }
      put(idx, v);
      f0_new += v;
    }

    for (int t = 2; t <= N; ++t) {
      std::uint64_t base = off2 + c2(t - 1);
      std::uint64_t pbase = off2 + c2(t - 2);
      const bool top = t == N;
      for (int m = 1; m < t; ++m) {
        std::uint64_t idx = base + m - 1;
        double v;
        if (m == 1) {
          v = p * (1.0 - g) * pi[t - 2] + p * g * f1_old[t - 1];
          if (top) v += p * (1.0 - g) * pi[N - 1];
        } else {
          v = (1.0 - p) * (1.0 - g) * pi[pbase + m - 2] +
              g * f2_old[pair_rank(t - 1, m - 1)];
          if (top) {
            if (m < N - 1)
              v += (1.0 - p) * (1.0 - g) * pi[idx - 1];
            else
              v += (1.0 - p) * (1.0 - g) * (pi[idx - 1] + pi[idx]);
          }
        }
        put(idx, v);
        f1_new[m] += v;
      }
    }

    for (int t = 3; t <= N; ++t) {
      std::uint64_t base3 = off3 + c3(t - 1);
      std::uint64_t pbase3 = off3 + c3(t - 2);
      std::uint64_t pbase2 = off2 + c2(t - 2);
      const bool top = t == N;
      for (int m = 2; m < t; ++m) {
        std::uint64_t basem = base3 + c2(m - 1);
        std::uint64_t pbasem = pbase3 + c2(m - 2);
        for (int l = 1; l < m; ++l) {
          std::uint64_t idx = basem + l - 1;
          double v;
          if (l == 1) {
            v = p * (1.0 - g) * pi[pbase2 + m - 2];
            if (top) {
              std::int32_t w[2] = {N, static_cast<std::int32_t>(m)};
              for_each_aging_preimage(w, 2, N, [&](const std::int32_t* x) {
                if (x[0] == N)  // (N-1, m-1) is the main term above
                  v += p * (1.0 - g) * pi[off2 + c2(N - 1) + x[1] - 1];
              });
            }
          } else {
            v = (1.0 - g) * pi[pbasem + l - 2];
            if (top) {
              std::int32_t w[3] = {N, static_cast<std::int32_t>(m),
                                   static_cast<std::int32_t>(l)};
              for_each_aging_preimage(w, 3, N, [&](const std::int32_t* x) {
                if (x[0] == N)
                  v += (1.0 - g) * pi[off3 + c3(N - 1) + c2(x[1] - 1) + x[2] - 1];
              });
            }
          }
          put(idx, v);
          f2_new[pair_rank(m, l)] += v;
        }
      }
    }

    double inv = 1.0 / sum;
    for (double& x : pi) x *= inv;
    for (double& x : f1_new) x *= inv;
    for (double& x : f2_new) x *= inv;
    f0_old = f0_new * inv;
    f1_old.swap(f1_new);
    f2_old.swap(f2_new);
    return delta + std::abs(1.0 - sum);
  };

  return gs_run(opt, sweep);
}

// ---- dim-3 engine: Ber/Geo/1/2* ----
GsScratch gs_star(const TransitionKernel& K, std::vector<double>& pi,
                  const SolveOptions& opt) {
  const AgeStateSpace& sp = K.space();
  const int N = sp.n_cap();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();
  const std::uint64_t off2 = sp.shape_offset(2), off3 = sp.shape_offset(3);
  auto c2 = [&](int n) { return sp.choose(n, 2); };
  auto c3 = [&](int n) { return sp.choose(n, 3); };
  auto pair_rank = [&](int a, int b) { return c2(a - 1) + (b - 1); };

  double f0_old = 0.0;
  std::vector<double> f1_old(N, 0.0), f1_new(N, 0.0);
  std::vector<double> f2_old(c2(N - 1), 0.0), f2_new(f2_old.size(), 0.0);
  std::vector<double> h_old(N, 0.0), h_new(N, 0.0);  // h[a] = sum_{k,j} pi(k,a,j)
  // p2[(t, m)] = sum_j pi(t, m, j), rebuilt while sweeping; the reads look one
  // level back except in the top corner block, which uses last sweep's copy.
  std::vector<double> p2(c2(N), 0.0);
  std::vector<double> p2_top_old(N, 0.0);

  {
    std::uint64_t idx = 0;
    for (int t = 1; t <= N; ++t) f0_old += pi[idx++];
    for (int t = 2; t <= N; ++t)
      for (int m = 1; m < t; ++m, ++idx) {
        f1_old[m] += pi[idx];
        h_old[m] += pi[idx];
        p2[pair_rank(t, m)] += pi[idx];
      }
    for (int t = 3; t <= N; ++t)
      for (int m = 2; m < t; ++m)
        for (int l = 1; l < m; ++l, ++idx) {
          f2_old[pair_rank(m, l)] += pi[idx];
          h_old[m] += pi[idx];
          p2[pair_rank(t, m)] += pi[idx];
        }
  }

  auto sweep = [&]() -> double {
    double f0_new = 0.0, sum = 0.0, delta = 0.0;
    std::fill(f1_new.begin(), f1_new.end(), 0.0);
    std::fill(f2_new.begin(), f2_new.end(), 0.0);
    std::fill(h_new.begin(), h_new.end(), 0.0);
    for (int m = 1; m < N; ++m) p2_top_old[m] = p2[pair_rank(N, m)];
    std::fill(p2.begin(), p2.end(), 0.0);
    auto put = [&](std::uint64_t idx, double v) {
      delta += std::abs(v - pi[idx]);
      pi[idx] = v;
      sum += v;
    };

    for (int t = 1; t <= N; ++t) {
      std::uint64_t idx = t - 1;
      double v;
      if (t == 1)
        v = p * g * f0_old;
      else {
        v = (1.0 - p) * pi[idx - 1] + (1.0 - p) * g * f1_old[t - 1];
        if (t == N) v += (1.0 - p) * pi[idx];
      }
      put(idx, v);
      f0_new += v;
    }

    for (int t = 2; t <= N; ++t) {
      std::uint64_t base = off2 + c2(t - 1);
      std::uint64_t pbase = off2 + c2(t - 2);
      const bool top = t == N;
      for (int m = 1; m < t; ++m) {
        std::uint64_t idx = base + m - 1;
        double v;
        if (m == 1) {
          v = p * (1.0 - g) * pi[t - 2] + p * g * h_old[t - 1];
          if (top) v += p * (1.0 - g) * pi[N - 1];
        } else {
          v = (1.0 - p) * (1.0 - g) * pi[pbase + m - 2] +
              (1.0 - p) * g * f2_old[pair_rank(t - 1, m - 1)];
          if (top) {
            if (m < N - 1)
              v += (1.0 - p) * (1.0 - g) * pi[idx - 1];
            else
              v += (1.0 - p) * (1.0 - g) * (pi[idx - 1] + pi[idx]);
          }
        }
        put(idx, v);
        f1_new[m] += v;
        h_new[m] += v;
        p2[pair_rank(t, m)] += v;
      }
    }

    for (int t = 3; t <= N; ++t) {
      std::uint64_t base3 = off3 + c3(t - 1);
      std::uint64_t pbase3 = off3 + c3(t - 2);
      const bool top = t == N;
      for (int m = 2; m < t; ++m) {
        std::uint64_t basem = base3 + c2(m - 1);
        std::uint64_t pbasem = pbase3 + c2(m - 2);
        for (int l = 1; l < m; ++l) {
          std::uint64_t idx = basem + l - 1;
          double v;
          if (l == 1) {
            v = p * (1.0 - g) * p2[pair_rank(t - 1, m - 1)];
            if (top) {
              std::int32_t w[2] = {N, static_cast<std::int32_t>(m)};
              for_each_aging_preimage(w, 2, N, [&](const std::int32_t* x) {
                if (x[0] != N) return;
                double p2x = (x[1] == m) ? p2_top_old[m] : p2[pair_rank(N, x[1])];
                v += p * (1.0 - g) * p2x;
              });
            }
          } else {
            v = (1.0 - p) * (1.0 - g) * pi[pbasem + l - 2];
            if (top) {
              std::int32_t w[3] = {N, static_cast<std::int32_t>(m),
                                   static_cast<std::int32_t>(l)};
              for_each_aging_preimage(w, 3, N, [&](const std::int32_t* x) {
                if (x[0] == N)
                  v += (1.0 - p) * (1.0 - g) *
                       pi[off3 + c3(N - 1) + c2(x[1] - 1) + x[2] - 1];
              });
            }
          }
          put(idx, v);
          f2_new[pair_rank(m, l)] += v;
          h_new[m] += v;
          p2[pair_rank(t, m)] += v;
        }
      }
    }

    double inv = 1.0 / sum;
    for (double& x : pi) x *= inv;
    for (double& x : f1_new) x *= inv;
    for (double& x : f2_new) x *= inv;
    for (double& x : h_new) x *= inv;
    for (double& x : p2) x *= inv;
    f0_old = f0_new * inv;
    f1_old.swap(f1_new);
    f2_old.swap(f2_new);
    h_old.swap(h_new);
    return delta + std::abs(1.0 - sum);
  };

  return gs_run(opt, sweep);
}

// ---- generic engine: Ber/Geo/1/c, any dimension >= 3 ----
GsScratch gs_geo1c(const TransitionKernel& K, std::vector<double>& pi,
                   const SolveOptions& opt) {
  const AgeStateSpace& sp = K.space();
  const int N = sp.n_cap();
  const int dim = sp.dimension();
  const double p = K.model().params().p();
  const double g = K.model().params().gamma();

  // f[h] indexes the (h-1)-component suffixes (w2..wh) of shape-h states.
  std::vector<std::vector<double>> f_old(dim + 2), f_new(dim + 2);
  f_old[1].assign(1, 0.0);
  f_new[1].assign(1, 0.0);
  for (int h = 2; h <= dim; ++h) {
    f_old[h].assign(sp.choose(N - 1, h - 1), 0.0);
    f_new[h].assign(f_old[h].size(), 0.0);
  }
  auto suffix_rank = [&](const std::int32_t* u, int len) {
    std::uint64_t r = 0;
    for (int i = 0; i < len; ++i) r += sp.choose(u[i] - 1, len - i);
    return r;
  };

  {
    std::uint64_t idx = 0;
    sp.for_each([&](const AgeState& s, std::uint64_t) {
      int j = s.nonzero_count();
      if (j == 1)
        f_old[1][0] += pi[idx];
      else
        f_old[j][suffix_rank(s.v.data() + 1, j - 1)] += pi[idx];
      ++idx;
    });
  }

  auto sweep = [&]() -> double {
    double sum = 0.0, delta = 0.0;
    for (int h = 1; h <= dim; ++h) std::fill(f_new[h].begin(), f_new[h].end(), 0.0);
    auto put = [&](std::uint64_t idx, double v) {
      delta += std::abs(v - pi[idx]);
      pi[idx] = v;
      sum += v;
    };

    const double d1 = (dim == 2) ? g : (1.0 - p) * g;
    for (int t = 1; t <= N; ++t) {
      std::uint64_t idx = t - 1;
      double v;
      if (t == 1)
        v = p * g * f_old[1][0];
      else {
        v = (1.0 - p) * pi[idx - 1] + d1 * f_old[2][t - 2];
        if (t == N) v += (1.0 - p) * pi[idx];
      }
      put(idx, v);
      f_new[1][0] += v;
    }

    std::int32_t u[detail::kMaxDim];
    std::int32_t w[detail::kMaxDim];
    for (int j = 2; j <= dim; ++j) {
      const int len = j - 1;
      const std::uint64_t off = sp.shape_offset(j);
      const double aging = (j == dim) ? (1.0 - g) : (1.0 - p) * (1.0 - g);
      const bool has_next = j + 1 <= dim;
      const double deliver = has_next ? ((j + 1 == dim) ? g : (1.0 - p) * g) : 0.0;
      for (int t = j; t <= N; ++t) {
        const bool top = t == N;
        const std::uint64_t level_base = off + sp.choose(t - 1, j);
        const std::uint64_t pred_level_base = off + sp.choose(t - 2, j);
        const std::uint64_t fnext_base = sp.choose(t - 2, j);       // (t-1, u-1)
        const std::uint64_t fsame_base = sp.choose(t - 2, j - 1);   // (t-1, prefix)
        for (int i = 0; i < len; ++i) u[i] = len - i;
        std::uint64_t urank = 0;
        bool more = true;
        while (more) {
          std::uint64_t idx = level_base + urank;
          double v = 0.0;
          if (u[len - 1] >= 2) {
            std::uint64_t pred_suffix = 0;
            for (int i = 0; i < len; ++i) pred_suffix += sp.choose(u[i] - 2, len - i);
            if (!top) {
              v = aging * pi[pred_level_base + pred_suffix];
            } else {
              w[0] = N;
              for (int i = 0; i < len; ++i) w[i + 1] = u[i];
              double acc = 0.0;
              for_each_aging_preimage(w, j, N, [&](const std::int32_t* x) {
                acc += pi[off + sp.choose(x[0] - 1, j) + suffix_rank(x + 1, len)];
              });
              v = aging * acc;
            }
            if (has_next) v += deliver * f_old[j + 1][fnext_base + pred_suffix];
          } else {
            std::uint64_t prefix = 0;
            for (int i = 0; i < len - 1; ++i) prefix += sp.choose(u[i] - 2, len - 1 - i);
            if (!top) {
              v = p * (1.0 - g) * pi[sp.shape_offset(j - 1) + fsame_base + prefix];
            } else {
              w[0] = N;
              for (int i = 0; i < len - 1; ++i) w[i + 1] = u[i];
              double acc = 0.0;
              for_each_aging_preimage(w, j - 1, N, [&](const std::int32_t* x) {
                acc += pi[sp.shape_offset(j - 1) + sp.choose(x[0] - 1, j - 1) +
                          suffix_rank(x + 1, len - 1)];
              });
              v = p * (1.0 - g) * acc;
            }
            if (j <= dim - 1) v += p * g * f_old[j][fsame_base + prefix];
          }
          put(idx, v);
          f_new[j][urank] += v;  // urank equals the global suffix rank of u
          more = false;
          for (int i = len - 1; i >= 0; --i) {
            int limit = (i == 0) ? t - 1 : u[i - 1] - 1;
            if (u[i] + 1 <= limit) {
              ++u[i];
              for (int q = i + 1; q < len; ++q) u[q] = len - q;
              more = true;
              break;
            }
          }
          ++urank;
        }
      }
    }

    double inv = 1.0 / sum;
    for (double& x : pi) x *= inv;
    for (int h = 1; h <= dim; ++h)
      for (double& x : f_new[h]) x *= inv;
    for (int h = 1; h <= dim; ++h) f_old[h].swap(f_new[h]);
    return delta + std::abs(1.0 - sum);
  };

  return gs_run(opt, sweep);
}

GsScratch gs_dispatch(const TransitionKernel& K, std::vector<double>& pi,
                      const SolveOptions& opt) {
  if (K.space().dimension() == 2) return gs_dim2(K, pi, opt);
  switch (K.model().kind()) {
    case QueueKind::BerGeo12Star:
      return gs_star(K, pi, opt);
    case QueueKind::BerGeo12:
      return gs_geo12(K, pi, opt);
    default:
      return gs_geo1c(K, pi, opt);
  }
}

double clamp_level_mass(const AgeStateSpace& sp, const std::vector<double>& pi) {
  // The v1 = n_cap slice of shape j occupies one contiguous rank range.
  double mass = 0.0;
  for (int j = 1; j <= sp.dimension(); ++j) {
    std::uint64_t lo = sp.shape_offset(j) + sp.choose(sp.n_cap() - 1, j);
    std::uint64_t hi = sp.shape_offset(j) + sp.choose(sp.n_cap(), j);
    for (std::uint64_t i = lo; i < hi; ++i) mass += pi[i];
  }
  return mass;
}

}  // namespace

VectorSolveResult solve_stationary(const SparseKernel& kernel, const SolveOptions& options) {
  switch (options.method) {
    case SolveMethod::Direct:
      return direct_solve(kernel, options);
    case SolveMethod::GaussSeidel:
      throw InvalidParams("gauss-seidel sweeps need the structural kernel");
    case SolveMethod::Auto:
    case SolveMethod::Power:
      return power_iterate(kernel, options);
  }
  throw InvalidParams("unknown solve method");
}

StationaryTable solve_stationary(const TransitionKernel& kernel, const SolveOptions& options) {
  const AgeStateSpace& sp = kernel.space();
  SolveMethod method = options.method;
  if (method == SolveMethod::Auto)
    method = sp.size() <= kPowerAutoLimit ? SolveMethod::Power : SolveMethod::GaussSeidel;

  StationaryTable table{sp, {}, 0.0, 0, true, true, 0.0, 0.0, ""};

  if (method == SolveMethod::Power || method == SolveMethod::Direct) {
    SolveOptions sub = options;
    sub.method = method;
    VectorSolveResult res = solve_stationary(materialize(kernel), sub);
    table.probs = std::move(res.pi);
    table.residual = res.residual;
    table.iterations = res.iterations;
    table.converged = res.converged;
    table.note = res.note;
  } else {
    table.probs.assign(sp.size(), 1.0 / static_cast<double>(sp.size()));
    GsScratch gs = gs_dispatch(kernel, table.probs, options);
    table.iterations = gs.sweeps;
    table.converged = gs.converged;
    if (!gs.converged) table.note = "gauss-seidel hit max_iters before the tolerance";
    if (options.compute_residual)
      table.residual = detail::kernel_residual(kernel, table.probs.data());
  }

  double r = 1.0 - kernel.model().params().p();
  if (kernel.model().service().is_geometric())
    r = std::max(r, 1.0 - kernel.model().service().geometric_rate());
  table.tail_ratio = r;
  table.tail_bound = 2.0 * clamp_level_mass(sp, table.probs) / (1.0 - r + 1e-300);
  return table;
}

}  // namespace aoi
