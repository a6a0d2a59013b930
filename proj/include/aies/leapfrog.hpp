#pragma once

// Leapfrog integration of dx/dt = B p, dp/dt = B^T ∇log pi(x).

#include "aies/target.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace aies {

enum class PreconditionerKind { identity, centered_ensemble, side_direction, general };

/// d x D matrix B. The identity case stores nothing.
class Preconditioner {
 public:
  static Preconditioner identity(Eigen::Index d) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::identity;
    p.dim_ = d;
    p.momentum_dim_ = d;
    return p;
  }

  /// Columns (x_j - m_S) / sqrt(|S|) of the walkers given as columns of `walkers`.
  static Preconditioner centered_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& walkers) {
    if (walkers.cols() < 2) throw std::invalid_argument("centered_ensemble: need at least two walkers");
    Preconditioner p;
    p.kind_ = PreconditionerKind::centered_ensemble;
    const Eigen::VectorXd mean = walkers.rowwise().mean();
    p.b_ = (walkers.colwise() - mean) / std::sqrt(static_cast<double>(walkers.cols()));
    p.dim_ = walkers.rows();
    p.momentum_dim_ = walkers.cols();
    return p;
  }

  /// Single column (x_j - x_k) / sqrt(2d).
  static Preconditioner side_direction(const ConstVecRef& xj, const ConstVecRef& xk) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::side_direction;
    p.b_ = (xj - xk) / std::sqrt(2.0 * static_cast<double>(xj.size()));
    p.dim_ = xj.size();
    p.momentum_dim_ = 1;
    return p;
  }

  static Preconditioner from_matrix(Eigen::MatrixXd b) {
    Preconditioner p;
    p.kind_ = PreconditionerKind::general;
    p.dim_ = b.rows();
    p.momentum_dim_ = b.cols();
    p.b_ = std::move(b);
    return p;
  }

  PreconditionerKind kind() const noexcept { return kind_; }
  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index momentum_dim() const noexcept { return momentum_dim_; }

  /// Dense B (materialized for the identity case).
  Eigen::MatrixXd matrix() const {
    return kind_ == PreconditionerKind::identity ? Eigen::MatrixXd::Identity(dim_, dim_) : b_;
  }

  Eigen::VectorXd apply(const ConstVecRef& p) const {
    return kind_ == PreconditionerKind::identity ? Eigen::VectorXd(p) : Eigen::VectorXd(b_ * p);
  }

  Eigen::VectorXd apply_transpose(const ConstVecRef& g) const {
    return kind_ == PreconditionerKind::identity ? Eigen::VectorXd(g) : Eigen::VectorXd(b_.transpose() * g);
  }

  /// Column-wise B P for a block of momenta.
  Eigen::MatrixXd apply_block(const Eigen::MatrixXd& p) const {
    return kind_ == PreconditionerKind::identity ? p : Eigen::MatrixXd(b_ * p);
  }

  Eigen::MatrixXd apply_transpose_block(const Eigen::MatrixXd& g) const {
    return kind_ == PreconditionerKind::identity ? g : Eigen::MatrixXd(b_.transpose() * g);
  }

 private:
  Preconditioner() = default;

  PreconditionerKind kind_ = PreconditionerKind::identity;
  Eigen::Index dim_ = 0;
  Eigen::Index momentum_dim_ = 0;
  Eigen::MatrixXd b_;
};

struct LeapfrogParams {
  double step = 0.1;
  int steps = 10;

  /// h = T / n.
  static LeapfrogParams from_horizon(double horizon, int steps) {
    if (steps < 1) throw std::invalid_argument("leapfrog: steps must be >= 1");
    return {horizon / steps, steps};
  }

  double horizon() const { return step * steps; }

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("leapfrog: step must be finite and > 0");
    if (steps < 1) throw std::invalid_argument("leapfrog: steps must be >= 1");
  }
};

struct PhasePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd p;

  bool finite() const { return x.allFinite() && p.allFinite(); }
};

/// n leapfrog steps with fused half kicks: exactly n + 1 gradient evaluations.
/// The momentum is not flipped. A diverging trajectory is integrated to the
/// end anyway, so the result has finite() == false and the caller rejects it.
template <TargetModel T>
PhasePoint leapfrog_n(const PhasePoint& start, const Preconditioner& b, const LeapfrogParams& params,
                      const T& target) {
  params.validate();
  if (start.x.size() != b.dim() || start.p.size() != b.momentum_dim())
    throw std::invalid_argument("leapfrog_n: phase point does not match preconditioner");
  const double h = params.step;
  PhasePoint z = start;
  Eigen::VectorXd g(z.x.size());
  target.grad_log_density(z.x, g);
  z.p += 0.5 * h * b.apply_transpose(g);
  for (int s = 0; s < params.steps; ++s) {
    z.x += h * b.apply(z.p);
    target.grad_log_density(z.x, g);
    z.p += (s + 1 < params.steps ? h : 0.5 * h) * b.apply_transpose(g);
  }
  return z;
}

/// Leapfrog for K walkers sharing one B: columns of x (d x K) and p (D x K).
/// Each kick and drift is one matrix product over all walkers. Gradients are
/// evaluated through `exec` over column indices [0, K).
template <TargetModel T, class Exec>
void leapfrog_batch(Eigen::MatrixXd& x, Eigen::MatrixXd& p, const Preconditioner& b, const LeapfrogParams& params,
                    const T& target, const Exec& exec) {
  params.validate();
  if (x.rows() != b.dim() || p.rows() != b.momentum_dim() || x.cols() != p.cols())
    throw std::invalid_argument("leapfrog_batch: shapes do not match preconditioner");
  const double h = params.step;
  const auto k = static_cast<std::size_t>(x.cols());
  Eigen::MatrixXd g(x.rows(), x.cols());
  auto gradients = [&] {
    exec(IndexRange{0, k}, [&](std::size_t c) {
      const auto col = static_cast<Eigen::Index>(c);
      Eigen::VectorXd gc(x.rows());
      target.grad_log_density(x.col(col), gc);
      g.col(col) = gc;
    });
  };
  gradients();
  p.noalias() += (0.5 * h) * b.apply_transpose_block(g);
  for (int s = 0; s < params.steps; ++s) {
    x.noalias() += h * b.apply_block(p);
    gradients();
    p.noalias() += (s + 1 < params.steps ? h : 0.5 * h) * b.apply_transpose_block(g);
  }
}

}  // namespace aies
