#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "reflekt/errors.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"

namespace reflekt {

/// A function R^n -> R ∪ {+inf} invariant under a finite reflection group.
struct InvariantFunction {
  std::string label;
  std::function<double(const Vec&)> eval;
  /// Closed-form subgradients at x: the extreme points of ∂f(x) where that set
  /// is a polytope, otherwise a list of known members. Empty when unavailable.
  std::function<std::vector<Vec>(const Vec&)> subgradients;
  std::shared_ptr<const FiniteGroup> group;

  double operator()(const Vec& x) const { return eval(x); }
  bool has_subgradients() const { return static_cast<bool>(subgradients); }
};

/// eval(g x) == eval(x) within `tolerance` for every enumerated g and sample x.
inline bool check_function_invariance(const InvariantFunction& f, const std::vector<Vec>& samples,
                                      double tolerance = 1e-10) {
  for (const auto& x : samples) {
    const double fx = f(x);
    for (const auto& g : f.group->elements()) {
      const double fg = f(g.matrix() * x);
      if (std::isinf(fx) != std::isinf(fg)) return false;
      if (!std::isinf(fx) && std::abs(fg - fx) > tolerance * std::max(1.0, std::abs(fx))) return false;
    }
  }
  return true;
}

namespace functions {

namespace detail {

inline double tie_scale(const Vec& x) { return 1e-12 * std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0); }

inline Vec unit(Eigen::Index n, Eigen::Index i, double value = 1.0) {
  Vec e = Vec::Zero(n);
  e[i] = value;
  return e;
}

}  // namespace detail

/// |x|_inf; invariant under signed permutations (families A, B, D).
inline InvariantFunction max_norm(std::shared_ptr<const FiniteGroup> group) {
  InvariantFunction f{"max-norm", [](const Vec& x) { return x.cwiseAbs().maxCoeff(); }, nullptr, std::move(group)};
  f.subgradients = [](const Vec& x) {
    const auto n = x.size();
    const double m = x.cwiseAbs().maxCoeff();
    std::vector<Vec> out;
    if (m <= detail::tie_scale(x)) {
      for (Eigen::Index i = 0; i < n; ++i) {
        out.push_back(detail::unit(n, i));
        out.push_back(detail::unit(n, i, -1.0));
      }
      return out;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(x[i]) >= m - detail::tie_scale(x)) out.push_back(detail::unit(n, i, x[i] < 0 ? -1.0 : 1.0));
    }
    return out;
  };
  return f;
}

/// |x|_1; invariant under signed permutations.
inline InvariantFunction l1_norm(std::shared_ptr<const FiniteGroup> group) {
  InvariantFunction f{"l1-norm", [](const Vec& x) { return x.cwiseAbs().sum(); }, nullptr, std::move(group)};
  f.subgradients = [](const Vec& x) {
    Vec base(x.size());
    std::vector<Eigen::Index> zeros;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) <= detail::tie_scale(x)) {
        base[i] = 1.0;
        zeros.push_back(i);
      } else {
        base[i] = x[i] < 0 ? -1.0 : 1.0;
      }
    }
    if (zeros.size() > 16) throw PreconditionError("l1-norm: too many zero coordinates to list extreme subgradients");
    std::vector<Vec> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << zeros.size()); ++mask) {
      Vec v = base;
      for (std::size_t b = 0; b < zeros.size(); ++b)
        if (mask >> b & 1U) v[zeros[b]] = -1.0;
      out.push_back(std::move(v));
    }
    return out;
  };
  return f;
}

/// Sum of the k largest coordinates; invariant under coordinate permutations (family A).
inline InvariantFunction sum_largest(std::shared_ptr<const FiniteGroup> group, std::size_t k) {
  const auto n = static_cast<std::size_t>(group->dimension());
  if (k < 1 || k > n) throw PreconditionError("sum_largest: k must lie in [1, n]");
  InvariantFunction f{"sum-largest-" + std::to_string(k),
                      [k](const Vec& x) {
                        std::vector<double> v(x.data(), x.data() + x.size());
                        std::sort(v.begin(), v.end(), std::greater<>());
                        return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
                      },
                      nullptr, std::move(group)};
  f.subgradients = [k](const Vec& x) {
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end(), std::greater<>());
    const double kth = v[k - 1];
    const double tie = detail::tie_scale(x);
    Vec base = Vec::Zero(x.size());
    std::vector<Eigen::Index> tied;
    std::size_t above = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > kth + tie) {
        base[i] = 1.0;
        ++above;
      } else if (x[i] >= kth - tie) {
        tied.push_back(i);
      }
    }
    const std::size_t pick = k - above;
    std::vector<Vec> out;
    std::vector<bool> mask(tied.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(pick), true);
    do {
      Vec g = base;
      for (std::size_t j = 0; j < tied.size(); ++j)
        if (mask[j]) g[tied[j]] = 1.0;
      out.push_back(std::move(g));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return out;
  };
  return f;
}

/// Distance to the centered ball of the given radius; invariant under any orthogonal group.
inline InvariantFunction distance_to_ball(std::shared_ptr<const FiniteGroup> group, double radius) {
  if (radius <= 0.0) throw PreconditionError("distance_to_ball: radius must be positive");
  InvariantFunction f{"distance-to-ball",
                      [radius](const Vec& x) { return std::max(0.0, x.norm() - radius); }, nullptr,
                      std::move(group)};
  f.subgradients = [radius](const Vec& x) {
    const double n = x.norm();
    const double tie = 1e-12 * std::max(1.0, n);
    if (n > radius + tie) return std::vector<Vec>{x / n};
    if (n < radius - tie) return std::vector<Vec>{Vec::Zero(x.size())};
    return std::vector<Vec>{Vec::Zero(x.size()), Vec(x / n)};
  };
  return f;
}

/// Euclidean norm. At the origin only the ±e_i members of the unit ball are listed.
inline InvariantFunction euclidean_norm(std::shared_ptr<const FiniteGroup> group) {
  InvariantFunction f{"euclidean-norm", [](const Vec& x) { return x.norm(); }, nullptr, std::move(group)};
  f.subgradients = [](const Vec& x) {
    const double n = x.norm();
    if (n > 1e-12) return std::vector<Vec>{x / n};
    std::vector<Vec> out;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out.push_back(detail::unit(x.size(), i));
      out.push_back(detail::unit(x.size(), i, -1.0));
    }
    return out;
  };
  return f;
}

inline InvariantFunction squared_norm(std::shared_ptr<const FiniteGroup> group) {
  InvariantFunction f{"squared-norm", [](const Vec& x) { return x.squaredNorm(); }, nullptr, std::move(group)};
  f.subgradients = [](const Vec& x) { return std::vector<Vec>{2.0 * x}; };
  return f;
}

inline InvariantFunction negative_squared_norm(std::shared_ptr<const FiniteGroup> group) {
  return InvariantFunction{"negative-squared-norm", [](const Vec& x) { return -x.squaredNorm(); }, nullptr,
                           std::move(group)};
}

inline InvariantFunction negative_l1_norm(std::shared_ptr<const FiniteGroup> group) {
  return InvariantFunction{"negative-l1-norm", [](const Vec& x) { return -x.cwiseAbs().sum(); }, nullptr,
                           std::move(group)};
}

/// x_1 * x_2 * ... * x_n; permutation invariant but not Schur convex.
inline InvariantFunction coordinate_product(std::shared_ptr<const FiniteGroup> group) {
  return InvariantFunction{"coordinate-product", [](const Vec& x) { return x.prod(); }, nullptr, std::move(group)};
}

/// |x| / (1 + |x|): quasiconvex (convex sublevel sets) but not convex.
inline InvariantFunction saturating_norm(std::shared_ptr<const FiniteGroup> group) {
  return InvariantFunction{"saturating-norm",
                           [](const Vec& x) {
                             const double n = x.norm();
                             return n / (1.0 + n);
                           },
                           nullptr, std::move(group)};
}

}  // namespace functions
}  // namespace reflekt
