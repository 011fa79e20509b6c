#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "reflekt/detail/random.hpp"
#include "reflekt/errors.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/sparse.hpp"

namespace reflekt {

/// min 1/2 |A x - b|^2 subject to |x|_0 <= s and x in B.
struct SensingProblem {
  Mat A;
  Vec b;
  std::size_t s = 0;
  std::optional<ConvexSet> bound;
  std::optional<Vec> x_true;
  double noise_norm = 0.0;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(A.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(A.cols()); }
  double objective(const Vec& x) const { return 0.5 * (A * x - b).squaredNorm(); }
};

/// Gaussian sensing matrix scaled by 1/sqrt(m), planted s-sparse signal with
/// entries ±U[1, 2] on a uniform random support, optional Gaussian noise.
inline SensingProblem generate_problem(std::size_t n, std::size_t m, std::size_t s, std::uint64_t seed,
                                       double noise_level = 0.0, std::optional<ConvexSet> bound = std::nullopt) {
  if (n < 1 || m < 1 || m > n) throw PreconditionError("generate_problem: need 1 <= m <= n");
  if (s > n) throw PreconditionError("generate_problem: need s <= n");
  if (noise_level < 0.0) throw PreconditionError("generate_problem: noise level must be nonnegative");
  detail::Sampler rng(seed);
  const auto rows = static_cast<Eigen::Index>(m);
  const auto cols = static_cast<Eigen::Index>(n);
  SensingProblem p;
  p.A.resize(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) p.A(i, j) = scale * rng.normal();

  std::vector<std::size_t> support(n);
  std::iota(support.begin(), support.end(), std::size_t{0});
  for (std::size_t i = 0; i < s; ++i) std::swap(support[i], support[i + rng.index(n - i)]);
  Vec x = Vec::Zero(cols);
  for (std::size_t i = 0; i < s; ++i) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    x[static_cast<Eigen::Index>(support[i])] = sign * rng.uniform(1.0, 2.0);
  }
  p.b = p.A * x;
  if (noise_level > 0.0) {
    const Vec noise = rng.gaussian(rows, noise_level);
    p.b += noise;
    p.noise_norm = noise.norm();
  }
  p.s = s;
  p.bound = std::move(bound);
  p.x_true = std::move(x);
  return p;
}

/// |A|_2^2 by power iteration on A^T A.
inline double spectral_norm_squared(const Mat& a, std::size_t iterations = 100, double tolerance = 1e-10) {
  if (a.size() == 0) return 0.0;
  Vec v = Vec::Ones(a.cols()).normalized();
  double estimate = 0.0;
  for (std::size_t k = 0; k < iterations; ++k) {
    Vec w = a.transpose() * (a * v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double change = std::abs(norm - estimate);
    estimate = norm;
    v = w / norm;
    if (change <= tolerance * estimate) break;
  }
  return estimate;
}

struct TraceRow {
  std::size_t k = 0;
  double objective = 0.0;
  std::size_t sparsity = 0;
  double step = 0.0;
};

enum class SolverStatus { Converged, MaxIter };

inline std::string to_string(SolverStatus s) { return s == SolverStatus::Converged ? "converged" : "max_iter"; }

struct SolverTrace {
  std::vector<TraceRow> iterates;
  SolverStatus status = SolverStatus::MaxIter;
};

struct IhtOptions {
  /// Fixed step; empty selects 1 / |A|_2^2.
  std::optional<double> step;
  std::size_t max_iter = 1000;
  double tol = 1e-10;
  std::optional<Vec> x0;
  SparseProjectOptions projection;
  /// Called with the full projection set of every step (debug inspection).
  std::function<void(const ProjectionSet&)> on_projection;
};

struct IhtResult {
  Vec x;
  SolverTrace trace;
};

inline constexpr double kDivergenceObjective = 1e12;

/// Projected gradient x_{k+1} = min_lex P_{C_s ∩ B}(x_k - step A^T (A x_k - b)).
inline IhtResult iht_solve(const SensingProblem& p, const IhtOptions& options = {}) {
  const auto n = p.A.cols();
  if (p.b.size() != p.A.rows()) throw PreconditionError("iht_solve: b does not match A");
  double step = 0.0;
  if (options.step) {
    step = *options.step;
    if (!(step > 0.0)) throw PreconditionError("iht_solve: step must be positive");
  } else {
    const double l = spectral_norm_squared(p.A);
    step = l > 0.0 ? 1.0 / l : 1.0;
  }

  Vec x = options.x0 ? *options.x0 : Vec::Zero(n);
  require_dimension(x, static_cast<std::size_t>(n), "iht_solve");
  IhtResult out;
  out.trace.iterates.push_back({0, p.objective(x), count_nonzero(x), step});
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    const Vec grad = p.A.transpose() * (p.A * x - p.b);
    const auto proj = sparse_project(x - step * grad, p.s, p.bound, options.projection);
    if (options.on_projection) options.on_projection(proj);
    Vec next = proj.lexicographic_min();
    const double objective = p.objective(next);
    if (!std::isfinite(objective) || objective > kDivergenceObjective) {
      throw DivergenceError("iht_solve: objective " + std::to_string(objective) + " at iteration " + std::to_string(k));
    }
    out.trace.iterates.push_back({k, objective, count_nonzero(next), step});
    const double change = (next - x).norm();
    x = std::move(next);
    if (change <= options.tol) {
      out.trace.status = SolverStatus::Converged;
      break;
    }
  }
  out.x = std::move(x);
  return out;
}

inline std::string trace_csv(const SolverTrace& trace) {
  std::string out = "k,objective,sparsity,step\n";
  char line[128];
  for (const auto& r : trace.iterates) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%.17g\n", r.k, r.objective, r.sparsity, r.step);
    out += line;
  }
  return out;
}

inline double relative_error(const Vec& x, const Vec& truth) {
  const double denom = truth.norm();
  return denom > 0.0 ? (x - truth).norm() / denom : x.norm();
}

struct SweepRow {
  std::size_t m = 0;
  std::size_t s = 0;
  std::size_t trials = 0;
  double success_rate = 0.0;
  double mean_rel_err = 0.0;
};

inline constexpr double kRecoveryThreshold = 1e-4;

/// Per-trial seed derived from (seed, m, s, trial) by splitmix64 mixing.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t m, std::size_t s, std::size_t trial) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(mix(seed) ^ m) ^ s) ^ trial);
}

/// Empirical recovery rate (relative error <= 1e-4) of noiseless IHT per (m, s) cell.
inline std::vector<SweepRow> recovery_sweep(std::size_t n, const std::vector<std::size_t>& m_list,
                                            const std::vector<std::size_t>& s_list, std::size_t trials,
                                            std::uint64_t seed, const IhtOptions& options = {}) {
  if (n < 1 || n > 128) throw PreconditionError("recovery_sweep: need 1 <= n <= 128");
  if (trials < 1 || trials > 100) throw PreconditionError("recovery_sweep: need 1 <= trials <= 100");
  std::vector<SweepRow> rows;
  for (auto m : m_list) {
    for (auto s : s_list) {
      SweepRow row{m, s, trials, 0.0, 0.0};
      std::size_t successes = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        const auto problem = generate_problem(n, m, s, trial_seed(seed, m, s, t));
        double err = std::numeric_limits<double>::infinity();
        try {
          err = relative_error(iht_solve(problem, options).x, *problem.x_true);
        } catch (const DivergenceError&) {
        }
        if (err <= kRecoveryThreshold) ++successes;
        row.mean_rel_err += err / static_cast<double>(trials);
      }
      row.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "m,s,trials,success_rate,mean_rel_err\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.6g,%.6g\n", r.m, r.s, r.trials, r.success_rate, r.mean_rel_err);
    out += line;
  }
  return out;
}

}  // namespace reflekt
