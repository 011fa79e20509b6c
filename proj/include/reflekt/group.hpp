#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reflekt/errors.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/root_system.hpp"

namespace reflekt {

/// An orthogonal matrix, optionally with the reflection word that produced it.
///
/// Words are stored in application order: the word [i0, i1, ..., ik] denotes
/// H_ik * ... * H_i1 * H_i0, i.e. reflection i0 acts on a vector first. Indices
/// refer to RootSystem::positive_roots().
class GroupElement {
 public:
  using Word = std::vector<std::size_t>;

  explicit GroupElement(Mat matrix, std::optional<Word> word = std::nullopt)
      : matrix_(std::move(matrix)), word_(std::move(word)) {
    if (matrix_.rows() != matrix_.cols()) throw PreconditionError("group element must be square");
    const auto n = matrix_.rows();
    if (max_abs_diff(Mat(matrix_.transpose() * matrix_), Mat::Identity(n, n)) > tol::kRootClosure) {
      throw PreconditionError("group element is not orthogonal");
    }
  }

  static GroupElement identity(std::size_t n) {
    const auto d = static_cast<Eigen::Index>(n);
    return GroupElement(Mat::Identity(d, d), Word{});
  }

  const Mat& matrix() const noexcept { return matrix_; }
  const std::optional<Word>& word() const noexcept { return word_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  Vec apply(const Vec& x) const {
    require_dimension(x, dimension(), "GroupElement::apply");
    return matrix_ * x;
  }

  GroupElement inverse() const {
    std::optional<Word> w;
    if (word_) w = Word(word_->rbegin(), word_->rend());
    return GroupElement(matrix_.transpose(), std::move(w));
  }

  /// Composition: (a * b).apply(x) == a.apply(b.apply(x)).
  friend GroupElement operator*(const GroupElement& a, const GroupElement& b) {
    std::optional<Word> w;
    if (a.word_ && b.word_) {
      w = *b.word_;
      w->insert(w->end(), a.word_->begin(), a.word_->end());
    }
    return GroupElement(a.matrix_ * b.matrix_, std::move(w));
  }

 private:
  Mat matrix_;
  std::optional<Word> word_;
};

/// Reflection across the hyperplane orthogonal to the unit vector u.
inline GroupElement householder(const Vec& u) { return GroupElement(householder_matrix(u)); }

/// Same as householder(u), with word = [index of u] when u is a positive root of rs.
inline GroupElement householder(const Vec& u, const RootSystem& rs) {
  Mat h = householder_matrix(u);
  if (auto idx = rs.positive_index_of(u)) return GroupElement(std::move(h), GroupElement::Word{*idx});
  return GroupElement(std::move(h));
}

/// Product of the positive-root reflections in `word` (application order).
inline Mat word_matrix(const RootSystem& rs, const GroupElement::Word& word) {
  const auto n = static_cast<Eigen::Index>(rs.dimension());
  Mat m = Mat::Identity(n, n);
  for (auto i : word) m = rs.reflection(i) * m;
  return m;
}

namespace detail {

/// Breadth-first closure of a set of positive-root reflections; every element
/// carries a shortest word over the given generators.
inline std::vector<GroupElement> reflection_closure(const RootSystem& rs, const std::vector<std::size_t>& generators,
                                                    std::size_t size_cap, double dedup_tol) {
  const auto n = static_cast<Eigen::Index>(rs.dimension());
  std::vector<Mat> gens;
  for (auto g : generators) gens.push_back(rs.reflection(g));

  NearIndex<Mat> seen(n, n, dedup_tol);
  std::vector<GroupElement> out;
  seen.insert(Mat::Identity(n, n));
  out.push_back(GroupElement::identity(rs.dimension()));
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (std::size_t k = 0; k < gens.size(); ++k) {
      Mat next = gens[k] * out[head].matrix();
      if (!seen.insert(next).second) continue;
      if (out.size() >= size_cap) {
        throw GroupTooLargeError("reflection closure exceeds size cap " + std::to_string(size_cap));
      }
      GroupElement::Word w = *out[head].word();
      w.push_back(generators[k]);
      out.emplace_back(std::move(next), std::move(w));
    }
  }
  return out;
}

}  // namespace detail

/// Explicitly enumerated finite reflection group. Element 0 is the identity.
class FiniteGroup {
 public:
  const RootSystem& root_system() const noexcept { return rs_; }
  const std::vector<GroupElement>& elements() const noexcept { return elements_; }
  std::size_t order() const noexcept { return elements_.size(); }
  std::size_t size_cap() const noexcept { return size_cap_; }
  std::size_t dimension() const noexcept { return rs_.dimension(); }

  std::optional<std::size_t> index_of(const Mat& m) const { return index_.find(m); }
  bool contains(const Mat& m) const { return index_of(m).has_value(); }

  friend FiniteGroup enumerate_group(const RootSystem& rs, std::size_t size_cap, double dedup_tol);

 private:
  FiniteGroup(RootSystem rs, std::vector<GroupElement> elements, std::size_t size_cap, double dedup_tol)
      : rs_(std::move(rs)),
        elements_(std::move(elements)),
        size_cap_(size_cap),
        index_(static_cast<Eigen::Index>(rs_.dimension()), static_cast<Eigen::Index>(rs_.dimension()), dedup_tol) {
    for (const auto& g : elements_) index_.insert(g.matrix());
  }

  RootSystem rs_;
  std::vector<GroupElement> elements_;
  std::size_t size_cap_;
  detail::NearIndex<Mat> index_;
};

/// Closure of {H_u : u positive} under multiplication, deduplicated at `dedup_tol`.
inline FiniteGroup enumerate_group(const RootSystem& rs, std::size_t size_cap = 100000,
                                   double dedup_tol = tol::kMatrixDedup) {
  if (size_cap < 1) throw PreconditionError("size_cap must be at least 1");
  std::vector<std::size_t> all(rs.positive_roots().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto elements = detail::reflection_closure(rs, all, size_cap, dedup_tol);
  return FiniteGroup(rs, std::move(elements), size_cap, dedup_tol);
}

/// {g x : g in G}, deduplicated.
inline std::vector<Vec> orbit(const FiniteGroup& group, const Vec& x, double dedup_tol = tol::kMatrixDedup) {
  require_dimension(x, group.dimension(), "orbit");
  detail::NearIndex<Vec> index(x.size(), 1, dedup_tol);
  for (const auto& g : group.elements()) index.insert(g.matrix() * x);
  return index.items();
}

struct Stabilizer {
  Vec base_point;
  /// Indices into positive_roots() of the roots orthogonal to base_point.
  std::vector<std::size_t> root_subset;
  /// The subgroup fixing base_point, generated by the reflections in root_subset.
  std::vector<GroupElement> elements;

  std::size_t order() const noexcept { return elements.size(); }
};

/// Fixed-point subgroup C_G(x), cross-checked against the subgroup generated
/// by the reflections whose mirrors contain x.
inline Stabilizer stabilizer(const FiniteGroup& group, const Vec& x, double zero_tol = tol::kZero,
                             double fixed_tol = tol::kFixedPoint) {
  require_dimension(x, group.dimension(), "stabilizer");
  const auto& rs = group.root_system();
  Stabilizer out{x, {}, {}};
  for (std::size_t i = 0; i < rs.positive_roots().size(); ++i) {
    if (std::abs(rs.positive_roots()[i].dot(x)) <= zero_tol) out.root_subset.push_back(i);
  }

  std::size_t fixed = 0;
  for (const auto& g : group.elements()) {
    if ((g.matrix() * x - x).norm() <= fixed_tol) ++fixed;
  }

  out.elements = detail::reflection_closure(rs, out.root_subset, group.order() + 1, tol::kMatrixDedup);
  bool consistent = out.elements.size() == fixed;
  for (const auto& h : out.elements) {
    if (!consistent) break;
    consistent = group.contains(h.matrix()) && (h.matrix() * x - x).norm() <= fixed_tol;
  }
  if (!consistent) {
    throw StabilizerMismatchError("wall reflections generate " + std::to_string(out.elements.size()) +
                                  " elements but " + std::to_string(fixed) + " elements fix the point");
  }
  return out;
}

}  // namespace reflekt
