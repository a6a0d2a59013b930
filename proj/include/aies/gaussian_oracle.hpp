#pragma once

// Closed-form -ΔH of n preconditioned leapfrog steps on a Gaussian target.
//
// For V(x) = |x|^2/2, write the eigenpairs of B^T B as (w_i, u_i) and
// q = U^T B^T x, pbar = U^T p. Each mode is a leapfrog oscillator with step
// h sqrt(w_i) that conserves |pbar_i|^2/2 + (1 - h^2 w_i/4) q_i^2 / (2 w_i),
// which gives -ΔH = (h^2/8) * sum_i (q_i(0)^2 - q_i(n)^2) with
//   q_i(n) = cos(n phi_i) q_i(0) + lhat_i sin(n phi_i) pbar_i(0),
//   phi_i = acos(1 - h^2 w_i / 2),  lhat_i = sqrt(w_i) / sqrt(1 - h^2 w_i / 4).

#include "aies/leapfrog.hpp"
#include "aies/targets.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace aies {

/// Isotropic target N(0, I). `steps` may be zero. Throws std::invalid_argument
/// when h * sqrt(w_max) >= 2, where the leapfrog map stops being a rotation.
inline double gaussian_delta_h_oracle(const ConstVecRef& x0, const ConstVecRef& p0,
                                      const Eigen::Ref<const Eigen::MatrixXd>& b, double step, int steps) {
  if (x0.size() != b.rows() || p0.size() != b.cols())
    throw std::invalid_argument("gaussian_delta_h_oracle: shapes do not match B");
  if (steps < 0) throw std::invalid_argument("gaussian_delta_h_oracle: steps must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("gaussian_delta_h_oracle: step must be > 0");
  if (steps == 0) return 0.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.transpose() * b);
  const Eigen::MatrixXd& u = eig.eigenvectors();
  const Eigen::VectorXd q0 = u.transpose() * (b.transpose() * x0);
  const Eigen::VectorXd pbar = u.transpose() * p0;
  const double h2 = step * step;

  double sum = 0.0;
  for (Eigen::Index k = 0; k < q0.size(); ++k) {
    const double w = std::max(eig.eigenvalues()(k), 0.0);
    if (h2 * w >= 4.0) throw std::invalid_argument("gaussian_delta_h_oracle: step exceeds the stability bound");
    if (w == 0.0) continue;  // frozen mode: q(n) = q(0)
    const double phi = std::acos(1.0 - 0.5 * h2 * w);
    const double lhat = std::sqrt(w) / std::sqrt(1.0 - 0.25 * h2 * w);
    const double qn = std::cos(steps * phi) * q0(k) + lhat * std::sin(steps * phi) * pbar(k);
    sum += q0(k) * q0(k) - qn * qn;
  }
  return h2 / 8.0 * sum;
}

inline double gaussian_delta_h_oracle(const ConstVecRef& x0, const ConstVecRef& p0, const Preconditioner& b,
                                      const LeapfrogParams& params) {
  return gaussian_delta_h_oracle(x0, p0, b.matrix(), params.step, params.steps);
}

/// Diagonal-precision Gaussian: whiten with y = Λ^{1/2} x, B_y = Λ^{1/2} B,
/// then use the isotropic form.
inline double gaussian_delta_h_oracle(const ConstVecRef& x0, const ConstVecRef& p0, const Preconditioner& b,
                                      const LeapfrogParams& params, const GaussianTarget& target) {
  const Eigen::VectorXd root = target.precision().cwiseSqrt();
  const Eigen::MatrixXd by = root.asDiagonal() * b.matrix();
  const Eigen::VectorXd y0 = root.cwiseProduct(x0);
  return gaussian_delta_h_oracle(y0, p0, by, params.step, params.steps);
}

}  // namespace aies
