#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/errors.hpp"
#include "reflekt/linalg.hpp"

namespace reflekt {

enum class Family { A, B, D, I2, Custom };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::D: return "D";
    case Family::I2: return "I2";
    case Family::Custom: return "custom";
  }
  return "custom";
}

inline Family family_from_string(const std::string& s) {
  if (s == "A") return Family::A;
  if (s == "B") return Family::B;
  if (s == "D") return Family::D;
  if (s == "I2") return Family::I2;
  return Family::Custom;
}

/// u rescaled so its largest entry has magnitude 1. Reflecting with
/// x - (2<r,x>/<r,r>) r is then exact whenever the root has entries in {0, ±c}.
inline Vec reflection_direction(const Vec& u) {
  const double m = u.cwiseAbs().maxCoeff();
  return m > 0.0 ? Vec(u / m) : u;
}

/// I - 2uu^T for a unit vector u.
inline Mat householder_matrix(const Vec& u) {
  const double norm = u.norm();
  if (std::abs(norm - 1.0) > tol::kUnitNorm) {
    throw NormalizationError("reflection normal must be a unit vector, got norm " + std::to_string(norm));
  }
  const auto n = u.size();
  const Vec r = reflection_direction(u);
  return Mat::Identity(n, n) - (2.0 / r.squaredNorm()) * r * r.transpose();
}

/// A root system together with a chosen positive subsystem.
///
/// Invariants checked on construction: every root is a unit vector, the set is
/// closed under negation and under every reflection H_u, and the positive
/// subsystem is exactly the half of the roots on the positive side of
/// `functional()`.
class RootSystem {
 public:
  /// Builds the positive subsystem from the deterministic generic functional
  /// w ∝ (n, n-1, ..., 1), perturbed if some root is orthogonal to it.
  static RootSystem from_roots(Family family, std::vector<Vec> roots) {
    if (roots.empty()) throw UnsupportedGroupError("root system needs at least one root");
    const auto n = static_cast<std::size_t>(roots.front().size());
    Vec w = generic_functional(roots, n);
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (w.dot(roots[i]) > 0.0) positive.push_back(i);
    }
    return RootSystem(family, std::move(roots), std::move(positive), std::move(w));
  }

  /// Uses a caller-chosen positive subsystem; a certifying functional is searched
  /// among the generic functional and the sum of the positive roots.
  static RootSystem with_positive(Family family, std::vector<Vec> roots, std::vector<std::size_t> positive) {
    if (roots.empty()) throw UnsupportedGroupError("root system needs at least one root");
    const auto n = static_cast<std::size_t>(roots.front().size());
    std::vector<Vec> candidates;
    Vec sum = Vec::Zero(static_cast<Eigen::Index>(n));
    for (auto i : positive) {
      if (i >= roots.size()) throw UnsupportedGroupError("positive root index out of range");
      sum += roots[i];
    }
    if (sum.norm() > 0.0) candidates.push_back(sum.normalized());
    try {
      candidates.push_back(generic_functional(roots, n));
    } catch (const UnsupportedGroupError&) {
    }
    for (const auto& w : candidates) {
      if (certifies(w, roots, positive)) return RootSystem(family, std::move(roots), std::move(positive), w);
    }
    throw UnsupportedGroupError("no linear functional certifies the given positive roots");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  Family family() const noexcept { return family_; }
  const std::vector<Vec>& roots() const noexcept { return roots_; }
  const std::vector<std::size_t>& positive_indices() const noexcept { return positive_indices_; }
  const std::vector<Vec>& positive_roots() const noexcept { return positive_; }
  const Vec& functional() const noexcept { return functional_; }

  /// Indices into positive_roots() of the simple roots (the chamber walls).
  const std::vector<std::size_t>& simple_indices() const noexcept { return simple_; }

  /// Householder matrix of the positive root with the given index.
  Mat reflection(std::size_t positive_index) const { return householder_matrix(positive_.at(positive_index)); }

  std::optional<std::size_t> positive_index_of(const Vec& u, double tolerance = tol::kRootClosure) const {
    if (static_cast<std::size_t>(u.size()) != dimension_) return std::nullopt;
    for (std::size_t i = 0; i < positive_.size(); ++i) {
      if (max_abs_diff(positive_[i], u) <= tolerance) return i;
    }
    return std::nullopt;
  }

 private:
  RootSystem(Family family, std::vector<Vec> roots, std::vector<std::size_t> positive, Vec functional)
      : family_(family),
        dimension_(static_cast<std::size_t>(roots.front().size())),
        roots_(std::move(roots)),
        positive_indices_(std::move(positive)),
        functional_(std::move(functional)) {
    validate();
    for (auto i : positive_indices_) positive_.push_back(roots_[i]);
    find_simple_roots();
  }

  static bool certifies(const Vec& w, const std::vector<Vec>& roots, const std::vector<std::size_t>& positive) {
    std::vector<bool> is_positive(roots.size(), false);
    for (auto i : positive) is_positive[i] = true;
    for (std::size_t i = 0; i < roots.size(); ++i) {
      const double d = w.dot(roots[i]);
      if (is_positive[i] ? d <= tol::kOrthogonal : d >= -tol::kOrthogonal) return false;
    }
    return true;
  }

  static Vec generic_functional(const std::vector<Vec>& roots, std::size_t n) {
    Vec base(static_cast<Eigen::Index>(n));
    Vec bump(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      base[static_cast<Eigen::Index>(i)] = static_cast<double>(n - i);
      bump[static_cast<Eigen::Index>(i)] = 1.0 / static_cast<double>(i + 1);
    }
    base.normalize();
    auto generic = [&](const Vec& w) {
      for (const auto& u : roots) {
        if (std::abs(w.dot(u)) <= tol::kOrthogonal) return false;
      }
      return true;
    };
    if (generic(base)) return base;
    for (int k = 1; k <= 64; ++k) {
      Vec w = (base + 1e-4 * k * bump).normalized();
      if (generic(w)) return w;
    }
    // In R^2 the bump is parallel to the base; fall back to (1, 1/4, ..., 1/n^2).
    for (std::size_t i = 0; i < n; ++i) bump[static_cast<Eigen::Index>(i)] = 1.0 / static_cast<double>((i + 1) * (i + 1));
    for (int k = 1; k <= 64; ++k) {
      Vec w = (base + 1e-4 * k * bump).normalized();
      if (generic(w)) return w;
    }
    throw UnsupportedGroupError("could not find a generic functional for the root system");
  }

  void validate() const {
    for (const auto& u : roots_) {
      if (static_cast<std::size_t>(u.size()) != dimension_) {
        throw UnsupportedGroupError("roots have inconsistent dimensions");
      }
      if (std::abs(u.norm() - 1.0) > tol::kUnitNorm) {
        throw NormalizationError("root with norm " + std::to_string(u.norm()) + " is not a unit vector");
      }
    }
    detail::NearIndex<Vec> index(static_cast<Eigen::Index>(dimension_), 1, tol::kRootClosure);
    for (const auto& u : roots_) {
      if (!index.insert(u).second) throw UnsupportedGroupError("duplicate root");
    }
    for (const auto& u : roots_) {
      if (!index.find(-u)) throw UnsupportedGroupError("root system is not closed under negation");
      const Mat h = householder_matrix(u);
      for (const auto& v : roots_) {
        if (!index.find(h * v)) throw UnsupportedGroupError("root system is not closed under its reflections");
      }
    }
    if (!certifies(functional_, roots_, positive_indices_)) {
      throw UnsupportedGroupError("functional does not separate positive from negative roots");
    }
  }

  // A positive root is simple iff its reflection permutes the other positive roots.
  void find_simple_roots() {
    for (std::size_t i = 0; i < positive_.size(); ++i) {
      const Mat h = householder_matrix(positive_[i]);
      bool simple = true;
      for (std::size_t j = 0; j < positive_.size() && simple; ++j) {
        if (j != i && functional_.dot(h * positive_[j]) < 0.0) simple = false;
      }
      if (simple) simple_.push_back(i);
    }
  }

  Family family_;
  std::size_t dimension_;
  std::vector<Vec> roots_;
  std::vector<std::size_t> positive_indices_;
  Vec functional_;
  std::vector<Vec> positive_;
  std::vector<std::size_t> simple_;
};

/// Named families: A (parameter = ambient dimension n, group S_n), B_n, D_n and
/// the dihedral I2(m) of order 2m. All roots are stored unit-norm.
inline RootSystem standard_root_system(Family family, int parameter) {
  std::vector<Vec> roots;
  const double r2 = 1.0 / std::sqrt(2.0);
  auto unit = [](int n, int i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    return e;
  };
  switch (family) {
    case Family::A: {
      const int n = parameter;
      if (n < 2) throw UnsupportedGroupError("A family needs ambient dimension n >= 2");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) roots.push_back(r2 * (unit(n, i) - unit(n, j)));
      break;
    }
    case Family::B:
    case Family::D: {
      const int n = parameter;
      if (family == Family::B && n < 1) throw UnsupportedGroupError("B family needs n >= 1");
      if (family == Family::D && n < 2) throw UnsupportedGroupError("D family needs n >= 2");
      if (family == Family::B) {
        for (int i = 0; i < n; ++i) {
          roots.push_back(unit(n, i));
          roots.push_back(-unit(n, i));
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          for (double si : {1.0, -1.0})
            for (double sj : {1.0, -1.0}) roots.push_back(r2 * (si * unit(n, i) + sj * unit(n, j)));
      break;
    }
    case Family::I2: {
      const int m = parameter;
      if (m < 2) throw UnsupportedGroupError("I2 family needs m >= 2");
      for (int k = 0; k < 2 * m; ++k) {
        const double angle = std::numbers::pi * k / m;
        Vec u(2);
        u << std::cos(angle), std::sin(angle);
        roots.push_back(u);
      }
      break;
    }
    case Family::Custom:
      throw UnsupportedGroupError("custom root systems must be given as an explicit root list");
  }
  return RootSystem::from_roots(family, std::move(roots));
}

/// Closed-form group order of the named families.
inline std::size_t expected_group_order(Family family, int parameter) {
  auto factorial = [](int k) {
    std::size_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::size_t>(i);
    return f;
  };
  switch (family) {
    case Family::A: return factorial(parameter);
    case Family::B: return (std::size_t{1} << parameter) * factorial(parameter);
    case Family::D: return (std::size_t{1} << (parameter - 1)) * factorial(parameter);
    case Family::I2: return 2 * static_cast<std::size_t>(parameter);
    case Family::Custom: break;
  }
  throw UnsupportedGroupError("no closed-form order for custom root systems");
}

}  // namespace reflekt
