#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aies {

/// Half-open walker index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  constexpr std::size_t size() const noexcept { return end - begin; }
  constexpr bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  constexpr bool operator==(const IndexRange&) const = default;
};

/// N walker positions in R^d, stored one walker per column.
///
/// N must be even and at least 4. The two groups are index based and never
/// reshuffled: group 0 is walkers [0, N/2), group 1 is [N/2, N).
class Ensemble {
 public:
  explicit Ensemble(Eigen::MatrixXd positions) : positions_(std::move(positions)) {
    validate(positions_.rows(), positions_.cols());
  }

  Ensemble(Eigen::Index dim, Eigen::Index n_walkers) : positions_(Eigen::MatrixXd::Zero(dim, n_walkers)) {
    validate(dim, n_walkers);
  }

  static Ensemble from_walkers(const std::vector<Eigen::VectorXd>& walkers) {
    if (walkers.empty()) throw std::invalid_argument("Ensemble: no walkers");
    const Eigen::Index d = walkers.front().size();
    Eigen::MatrixXd m(d, static_cast<Eigen::Index>(walkers.size()));
    for (std::size_t i = 0; i < walkers.size(); ++i) {
      if (walkers[i].size() != d) throw std::invalid_argument("Ensemble: walker dimension mismatch");
      m.col(static_cast<Eigen::Index>(i)) = walkers[i];
    }
    return Ensemble(std::move(m));
  }

  Eigen::Index dim() const noexcept { return positions_.rows(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(positions_.cols()); }
  std::size_t half_size() const noexcept { return size() / 2; }

  auto walker(std::size_t i) const { return positions_.col(static_cast<Eigen::Index>(i)); }
  auto walker(std::size_t i) { return positions_.col(static_cast<Eigen::Index>(i)); }

  const Eigen::MatrixXd& positions() const noexcept { return positions_; }
  Eigen::MatrixXd& positions() noexcept { return positions_; }

  /// Columns of one group as a d x N/2 block.
  auto group_block(const IndexRange& r) const {
    return positions_.middleCols(static_cast<Eigen::Index>(r.begin), static_cast<Eigen::Index>(r.size()));
  }

 private:
  static void validate(Eigen::Index dim, Eigen::Index n) {
    if (dim < 1) throw std::invalid_argument("Ensemble: dimension must be positive");
    if (n < 4 || n % 2 != 0)
      throw std::invalid_argument("Ensemble: walker count must be even and >= 4, got " + std::to_string(n));
  }

  Eigen::MatrixXd positions_;
};

/// Index range of group s (0 or 1).
inline IndexRange group_range(const Ensemble& e, int s) {
  const std::size_t h = e.half_size();
  return s == 0 ? IndexRange{0, h} : IndexRange{h, 2 * h};
}

/// The two groups S0 = [0, N/2) and S1 = [N/2, N); each is the other's complement.
inline std::pair<IndexRange, IndexRange> split_halves(const Ensemble& e) {
  return {group_range(e, 0), group_range(e, 1)};
}

/// y = A x + b with A invertible (checked: full rank and finite condition number).
class AffineMap {
 public:
  AffineMap(Eigen::MatrixXd A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != A_.cols()) throw std::invalid_argument("AffineMap: A must be square");
    if (b_.size() != A_.rows()) throw std::invalid_argument("AffineMap: b has wrong length");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A_);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(s.size() - 1) > 0.0) || !std::isfinite(s(0) / s(s.size() - 1)))
      throw std::invalid_argument("AffineMap: A is singular");
    cond_ = s(0) / s(s.size() - 1);
    lu_ = A_.partialPivLu();
  }

  static AffineMap identity(Eigen::Index d) {
    return AffineMap(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
  }

  Eigen::Index dim() const noexcept { return A_.rows(); }
  const Eigen::MatrixXd& linear() const noexcept { return A_; }
  const Eigen::VectorXd& offset() const noexcept { return b_; }
  double condition_number() const noexcept { return cond_; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const { return A_ * x + b_; }

  /// x = A^{-1}(y - b), via the stored LU factorisation.
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& y) const { return lu_.solve(y - b_); }

  /// A^{-T} g, the pullback of a gradient.
  Eigen::VectorXd solve_transpose(const Eigen::Ref<const Eigen::VectorXd>& g) const {
    return lu_.transpose().solve(g);
  }

  AffineMap inverse() const {
    Eigen::MatrixXd Ainv = lu_.solve(Eigen::MatrixXd::Identity(dim(), dim()));
    Eigen::VectorXd binv = -(Ainv * b_);
    return AffineMap(std::move(Ainv), std::move(binv));
  }

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double cond_ = 1.0;
};

inline Ensemble apply_affine(const Ensemble& e, const AffineMap& map) {
  if (map.dim() != e.dim()) throw std::invalid_argument("apply_affine: dimension mismatch");
  Eigen::MatrixXd y = map.linear() * e.positions();
  y.colwise() += map.offset();
  return Ensemble(std::move(y));
}

}  // namespace aies
