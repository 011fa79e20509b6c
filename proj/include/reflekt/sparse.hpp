#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/errors.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/projection.hpp"

namespace reflekt {

/// C_s = { x in R^n : |x|_0 <= s }.
class SparsityConstraint {
 public:
  SparsityConstraint(std::size_t n, std::size_t s) : n_(n), s_(s) {
    if (s > n) throw PreconditionError("sparsity level exceeds the dimension");
  }
  std::size_t dimension() const noexcept { return n_; }
  std::size_t level() const noexcept { return s_; }
  bool contains(const Vec& x) const { return static_cast<std::size_t>(x.size()) == n_ && count_nonzero(x) <= s_; }

 private:
  std::size_t n_;
  std::size_t s_;
};

/// A closed convex set invariant under coordinate permutations and sign changes,
/// given by a membership test and its full-space Euclidean projector.
struct ConvexSet {
  std::string label;
  std::function<bool(const Vec&)> contains;
  std::function<Vec(const Vec&)> project;
};

inline ConvexSet ball_set(double radius) {
  if (radius < 0.0) throw PreconditionError("ball radius must be nonnegative");
  return ConvexSet{"ball(" + std::to_string(radius) + ")",
                   [radius](const Vec& x) { return x.norm() <= radius + tol::kProjectionDistance; },
                   [radius](const Vec& x) {
                     const double n = x.norm();
                     return n <= radius ? x : Vec(x * (radius / n));
                   }};
}

inline ConvexSet box_set(double half_width) {
  if (half_width < 0.0) throw PreconditionError("box half width must be nonnegative");
  return ConvexSet{"box(" + std::to_string(half_width) + ")",
                   [half_width](const Vec& x) {
                     return x.size() == 0 || x.cwiseAbs().maxCoeff() <= half_width + tol::kProjectionDistance;
                   },
                   [half_width](const Vec& x) { return Vec(x.cwiseMax(-half_width).cwiseMin(half_width)); }};
}

/// Adapts a convex invariant-set oracle (under B_n) to a ConvexSet; projections
/// go through project_invariant and must be unique.
inline ConvexSet convex_set_from_oracle(InvariantSetOracle oracle) {
  auto shared = std::make_shared<InvariantSetOracle>(std::move(oracle));
  return ConvexSet{shared->label, [shared](const Vec& x) { return shared->contains(x); },
                   [shared](const Vec& x) {
                     auto p = project_invariant(*shared, x);
                     if (p.points.size() != 1) throw OracleViolationError(shared->label + ": projection is not unique");
                     return p.points.front();
                   }};
}

/// A signed permutation Q with (Q x)_i = sign_i * x_{source_i}.
struct SignedPermutation {
  std::vector<std::size_t> source;
  std::vector<double> sign;

  Vec apply(const Vec& x) const {
    Vec out(x.size());
    for (std::size_t i = 0; i < source.size(); ++i) out[static_cast<Eigen::Index>(i)] = sign[i] * x[static_cast<Eigen::Index>(source[i])];
    return out;
  }
  Vec apply_inverse(const Vec& y) const {
    Vec out(y.size());
    for (std::size_t i = 0; i < source.size(); ++i) out[static_cast<Eigen::Index>(source[i])] = sign[i] * y[static_cast<Eigen::Index>(i)];
    return out;
  }
  Mat matrix() const {
    const auto n = static_cast<Eigen::Index>(source.size());
    Mat m = Mat::Zero(n, n);
    for (std::size_t i = 0; i < source.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(source[i])) = sign[i];
    return m;
  }
};

/// The Q with Q x = |x| sorted nonincreasingly (stable on equal magnitudes).
inline SignedPermutation sort_by_magnitude(const Vec& x) {
  SignedPermutation q;
  q.source.resize(static_cast<std::size_t>(x.size()));
  std::iota(q.source.begin(), q.source.end(), std::size_t{0});
  std::stable_sort(q.source.begin(), q.source.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(x[static_cast<Eigen::Index>(a)]) > std::abs(x[static_cast<Eigen::Index>(b)]);
  });
  for (auto i : q.source) q.sign.push_back(x[static_cast<Eigen::Index>(i)] < 0.0 ? -1.0 : 1.0);
  return q;
}

namespace detail {

inline bool in_signed_chamber(const Vec& x, double slack = tol::kChamberSlack) {
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    if (x[i] < x[i + 1] - slack) return false;
  }
  return x.size() == 0 || x[x.size() - 1] >= -slack;
}

/// Projection onto { y : y_1 >= ... >= y_k } by pool-adjacent-violators.
inline Vec nonincreasing_regression(const Vec& x) {
  std::vector<double> value;
  std::vector<std::size_t> width;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    value.push_back(x[i]);
    width.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] < value.back()) {
      const auto w = width[width.size() - 2] + width.back();
      const double v = (value[value.size() - 2] * static_cast<double>(width[width.size() - 2]) +
                        value.back() * static_cast<double>(width.back())) /
                       static_cast<double>(w);
      value.pop_back();
      width.pop_back();
      value.back() = v;
      width.back() = w;
    }
  }
  Vec out(x.size());
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < value.size(); ++b)
    for (std::size_t k = 0; k < width[b]; ++k) out[pos++] = value[b];
  return out;
}

/// Projection onto chamber ∩ C_s = { y_1 >= ... >= y_s >= 0, y_{s+1} = ... = y_n = 0 }.
inline Vec project_sparse_chamber_cone(const Vec& x, std::size_t s) {
  Vec out = Vec::Zero(x.size());
  const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(s, static_cast<std::size_t>(x.size())));
  if (k > 0) out.head(k) = nonincreasing_regression(x.head(k)).cwiseMax(0.0);
  return out;
}

}  // namespace detail

/// Projection of a chamber point (x_1 >= ... >= x_n >= 0) onto C_s ∩ chamber:
/// keep the first s coordinates, zero the rest.
inline Vec sparse_chamber_project(const Vec& x, std::size_t s) {
  if (!detail::in_signed_chamber(x)) throw NotInChamberError("sparse_chamber_project: input is not sorted nonnegative");
  Vec y = x;
  for (auto i = static_cast<Eigen::Index>(std::min<std::size_t>(s, static_cast<std::size_t>(x.size()))); i < x.size(); ++i) y[i] = 0.0;
  return y;
}

struct DykstraOptions {
  std::size_t max_iter = 10000;
  double tolerance = 1e-9;
};

/// Dykstra's alternating projections; converges to the projection of x onto A ∩ B.
/// The returned point lies in B and within `tolerance` of A.
inline Vec dykstra_intersection(const std::function<Vec(const Vec&)>& project_a,
                                const std::function<Vec(const Vec&)>& project_b, const Vec& x,
                                DykstraOptions options = {}) {
  Vec current = x;
  Vec p = Vec::Zero(x.size());
  Vec q = Vec::Zero(x.size());
  double gap = 0.0;
  for (std::size_t k = 0; k < options.max_iter; ++k) {
    const Vec y = project_a(current + p);
    p = current + p - y;
    const Vec next = project_b(y + q);
    q = y + q - next;
    gap = (next - y).norm();
    const double change = (next - current).norm();
    current = next;
    if (gap <= options.tolerance && change <= options.tolerance &&
        (project_a(current) - current).norm() <= options.tolerance) {
      return current;
    }
  }
  throw DykstraNonconvergence("Dykstra did not converge in " + std::to_string(options.max_iter) +
                              " iterations (gap " + std::to_string(gap) + ")");
}

struct SparseProjectOptions {
  DykstraOptions dykstra;
  /// Explicit enumeration of the projection set is refused beyond this size.
  std::size_t max_points = 10000;
  /// Relative tolerance under which magnitudes count as tied.
  double tie_tol = 1e-12;
};

namespace detail {

struct Block {
  std::size_t begin;
  std::size_t end;
  bool zero;
};

inline std::vector<Block> equal_value_blocks(const Vec& sorted, double tie_tol) {
  std::vector<Block> blocks;
  const double scale = std::max(1.0, sorted.size() ? std::abs(sorted[0]) : 0.0);
  const auto n = static_cast<std::size_t>(sorted.size());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && std::abs(sorted[static_cast<Eigen::Index>(j)] - sorted[static_cast<Eigen::Index>(i)]) <= tie_tol * scale) ++j;
    blocks.push_back({i, j, std::abs(sorted[static_cast<Eigen::Index>(i)]) <= tie_tol * scale});
    i = j;
  }
  return blocks;
}

inline std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

/// |Sym(width)| (times 2^width for sign changes), saturating at SIZE_MAX.
inline std::size_t block_stabilizer_order(std::size_t width, bool signed_block) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= width; ++i) f = saturating_mul(f, i);
  if (signed_block)
    for (std::size_t i = 0; i < width; ++i) f = saturating_mul(f, 2);
  return f;
}

/// Distinct rearrangements of `values` (signs free when `signed_block`).
inline std::vector<std::vector<double>> block_images(std::vector<double> values, bool signed_block, std::size_t cap) {
  std::set<std::vector<double>> out;
  std::vector<std::vector<double>> bases;
  if (signed_block) {
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = std::abs(values[i]);
      if (values[i] != 0.0) nz.push_back(i);
    }
    if (nz.size() >= 63 || (std::size_t{1} << nz.size()) > cap) throw GroupTooLargeError("projection set too large to enumerate");
    for (std::size_t mask = 0; mask < (std::size_t{1} << nz.size()); ++mask) {
      auto v = values;
      for (std::size_t b = 0; b < nz.size(); ++b)
        if (mask >> b & 1U) v[nz[b]] = -v[nz[b]];
      bases.push_back(std::move(v));
    }
  } else {
    bases.push_back(std::move(values));
  }
  for (auto& v : bases) {
    std::sort(v.begin(), v.end());
    do {
      out.insert(v);
      if (out.size() > cap) throw GroupTooLargeError("projection set too large to enumerate");
    } while (std::next_permutation(v.begin(), v.end()));
  }
  return {out.begin(), out.end()};
}

}  // namespace detail

/// All projections of x onto C_s ∩ B (B optional, convex, sign/permutation invariant).
///
/// x is sorted to x̌ = |x|↓ by a signed permutation Q, projected inside the
/// chamber (truncation, then Dykstra against B when present), and the full set
/// is rebuilt as Q^-1 C(x̌) y̌ by enumerating the distinct images of y̌ under the
/// stabilizer of x̌: permutations within tied magnitudes and sign changes on zeros.
inline ProjectionSet sparse_project(const Vec& x, std::size_t s, const std::optional<ConvexSet>& bound = std::nullopt,
                                    const SparseProjectOptions& options = {}) {
  const SparsityConstraint constraint(static_cast<std::size_t>(x.size()), s);
  const std::size_t level = constraint.level();
  const SignedPermutation q = sort_by_magnitude(x);
  const Vec rep = q.apply(x);

  Vec chamber_proj;
  if (!bound) {
    chamber_proj = sparse_chamber_project(rep, level);
  } else {
    auto cone = [level](const Vec& v) { return detail::project_sparse_chamber_cone(v, level); };
    const Vec raw = dykstra_intersection(cone, bound->project, rep, options.dykstra);
    chamber_proj = cone(raw);
    if (!bound->contains(chamber_proj)) {
      throw DykstraNonconvergence("sparse chamber projection left the constraint set " + bound->label);
    }
  }

  const auto blocks = detail::equal_value_blocks(rep, options.tie_tol);
  std::vector<std::vector<std::vector<double>>> per_block;
  std::size_t total = 1;
  std::size_t stab_order = 1;
  for (const auto& b : blocks) {
    std::vector<double> vals;
    for (std::size_t i = b.begin; i < b.end; ++i) vals.push_back(chamber_proj[static_cast<Eigen::Index>(i)]);
    per_block.push_back(detail::block_images(std::move(vals), b.zero, options.max_points));
    total *= per_block.back().size();
    if (total > options.max_points) throw GroupTooLargeError("projection set exceeds " + std::to_string(options.max_points) + " points");
    stab_order = detail::saturating_mul(stab_order, detail::block_stabilizer_order(b.end - b.begin, b.zero));
  }

  std::vector<Vec> points;
  std::vector<std::size_t> choice(blocks.size(), 0);
  for (std::size_t count = 0; count < total; ++count) {
    Vec img(x.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const auto& vals = per_block[bi][choice[bi]];
      for (std::size_t k = 0; k < vals.size(); ++k) img[static_cast<Eigen::Index>(blocks[bi].begin + k)] = vals[k];
    }
    points.push_back(q.apply_inverse(img));
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      if (++choice[bi] < per_block[bi].size()) break;
      choice[bi] = 0;
    }
  }

  const double distance = (rep - chamber_proj).norm();
  return ProjectionSet{x, distance, {chamber_proj}, GroupElement(q.matrix()), std::nullopt, stab_order, std::move(points)};
}

}  // namespace reflekt
