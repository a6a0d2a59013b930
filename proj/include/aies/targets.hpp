#pragma once

// Benchmark targets: anisotropic Gaussian, ring, and the discretised
// Allen-Cahn (double-well) path measure.

#include "aies/target.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace aies {

namespace detail {
inline void require_dim(Eigen::Index got, Eigen::Index want, const char* who) {
  if (got != want)
    throw std::invalid_argument(std::string(who) + ": expected dimension " + std::to_string(want) + ", got " +
                                std::to_string(got));
}
}  // namespace detail

/// Diagonal precision with eigenvalues in arithmetic progression from
/// lambda_min to lambda_min * kappa (d terms).
struct GaussianSpec {
  Eigen::Index dim = 1;
  double kappa = 1.0;
  double lambda_min = 0.1;

  Eigen::VectorXd precision_eigenvalues() const {
    if (dim < 1) throw std::invalid_argument("GaussianSpec: dim must be positive");
    if (!(kappa >= 1.0) || !(lambda_min > 0.0)) throw std::invalid_argument("GaussianSpec: need kappa >= 1, lambda_min > 0");
    if (dim == 1) return Eigen::VectorXd::Constant(1, lambda_min);
    return Eigen::VectorXd::LinSpaced(dim, lambda_min, lambda_min * kappa);
  }
};

class GaussianTarget {
 public:
  explicit GaussianTarget(const GaussianSpec& spec) : precision_(spec.precision_eigenvalues()) {}
  explicit GaussianTarget(Eigen::VectorXd precision) : precision_(std::move(precision)) {
    if (precision_.size() < 1 || (precision_.array() <= 0.0).any())
      throw std::invalid_argument("GaussianTarget: precision eigenvalues must be positive");
  }

  static GaussianTarget isotropic(Eigen::Index d) { return GaussianTarget(Eigen::VectorXd::Ones(d)); }

  Eigen::Index dim() const { return precision_.size(); }
  const Eigen::VectorXd& precision() const { return precision_; }

  double log_density(const ConstVecRef& x) const {
    detail::require_dim(x.size(), dim(), "gaussian_log_density");
    return -0.5 * (precision_.array() * x.array().square()).sum();
  }

  void grad_log_density(const ConstVecRef& x, VecRef g) const {
    detail::require_dim(x.size(), dim(), "gaussian_log_density");
    g = -(precision_.array() * x.array()).matrix();
  }

 private:
  Eigen::VectorXd precision_;
};

struct RingSpec {
  Eigen::Index dim = 2;
  double width = 0.25;
};

/// log pi(x) = -(|x|^2 - 1)^2 / l^2
class RingTarget {
 public:
  explicit RingTarget(const RingSpec& spec) : dim_(spec.dim), width_(spec.width) {
    if (dim_ < 1) throw std::invalid_argument("RingTarget: dim must be positive");
    if (!(width_ > 0.0)) throw std::invalid_argument("RingTarget: width must be positive");
  }

  Eigen::Index dim() const { return dim_; }
  double width() const { return width_; }

  double log_density(const ConstVecRef& x) const {
    detail::require_dim(x.size(), dim_, "ring_log_density");
    const double r = x.squaredNorm() - 1.0;
    return -(r * r) / (width_ * width_);
  }

  void grad_log_density(const ConstVecRef& x, VecRef g) const {
    detail::require_dim(x.size(), dim_, "ring_log_density");
    const double r = x.squaredNorm() - 1.0;
    g = (-4.0 * r / (width_ * width_)) * x;
  }

 private:
  Eigen::Index dim_;
  double width_;
};

struct AllenCahnSpec {
  Eigen::Index grid_size = 64;
};

/// Finite-difference Allen-Cahn energy on d equispaced nodes covering [0, 1]:
///   E(u) = sum_{i<d-1} (u_{i+1} - u_i)^2 / (2 dx) + dx * sum_i w_i (1 - u_i^2)^2
/// with trapezoid weights w (1/2 at the endpoints). Endpoints are free
/// (natural boundary conditions). log pi(u) = -E(u).
class AllenCahnTarget {
 public:
  explicit AllenCahnTarget(const AllenCahnSpec& spec) : d_(spec.grid_size) {
    if (d_ < 2) throw std::invalid_argument("AllenCahnTarget: grid size must be >= 2");
    dx_ = 1.0 / static_cast<double>(d_ - 1);
  }

  Eigen::Index dim() const { return d_; }
  double spacing() const { return dx_; }

  double log_density(const ConstVecRef& u) const {
    detail::require_dim(u.size(), d_, "allen_cahn_log_density");
    double kinetic = 0.0;
    for (Eigen::Index i = 0; i + 1 < d_; ++i) {
      const double du = u(i + 1) - u(i);
      kinetic += du * du;
    }
    double potential = 0.0;
    for (Eigen::Index i = 0; i < d_; ++i) {
      const double w = (i == 0 || i == d_ - 1) ? 0.5 : 1.0;
      const double s = 1.0 - u(i) * u(i);
      potential += w * s * s;
    }
    return -(kinetic / (2.0 * dx_) + dx_ * potential);
  }

  void grad_log_density(const ConstVecRef& u, VecRef g) const {
    detail::require_dim(u.size(), d_, "allen_cahn_log_density");
    for (Eigen::Index i = 0; i < d_; ++i) {
      double dk = 0.0;
      if (i > 0) dk += u(i) - u(i - 1);
      if (i + 1 < d_) dk -= u(i + 1) - u(i);
      const double w = (i == 0 || i == d_ - 1) ? 0.5 : 1.0;
      const double dv = -4.0 * u(i) * (1.0 - u(i) * u(i));
      g(i) = -(dk / dx_ + dx_ * w * dv);
    }
  }

 private:
  Eigen::Index d_;
  double dx_ = 1.0;
};

/// Composite trapezoid approximation of the integral of u over [0, 1].
inline double path_integral_observable(const ConstVecRef& u) {
  const Eigen::Index d = u.size();
  if (d < 2) throw std::invalid_argument("path_integral_observable: need at least 2 nodes");
  const double dx = 1.0 / static_cast<double>(d - 1);
  return dx * (u.sum() - 0.5 * (u(0) + u(d - 1)));
}

}  // namespace aies
