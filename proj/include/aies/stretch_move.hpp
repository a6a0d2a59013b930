#pragma once

#include "aies/executor.hpp"
#include "aies/state.hpp"

#include <cmath>
#include <stdexcept>

namespace aies {

struct StretchParams {
  double a = 2.0;

  /// a = 1 + 2.151 / sqrt(d), the high-dimensional ESJD optimum.
  static StretchParams for_dimension(Eigen::Index d) { return {1.0 + 2.151 / std::sqrt(static_cast<double>(d))}; }

  void validate() const {
    if (!(a > 1.0)) throw std::invalid_argument("stretch move: a must be > 1");
  }
};

/// Inverse-CDF draw from g(z) ∝ 1/sqrt(z) on [1/a, a]: z = (a^{-1/2} + u (a^{1/2} - a^{-1/2}))^2.
inline double sample_stretch_z(double a, double u) {
  if (!(a > 1.0)) throw std::invalid_argument("sample_stretch_z: a must be > 1");
  const double lo = 1.0 / std::sqrt(a);
  const double t = lo + u * (std::sqrt(a) - lo);
  return t * t;
}

/// log( z^{d-1} pi(proposal) / pi(current) )
inline double stretch_log_acceptance(double z, Eigen::Index dim, double log_density_proposal,
                                     double log_density_current) {
  return static_cast<double>(dim - 1) * std::log(z) + log_density_proposal - log_density_current;
}

/// x_j + z (x_i - x_j)
inline Eigen::VectorXd stretch_propose(const ConstVecRef& xi, const ConstVecRef& xj, double z) {
  return xj + z * (xi - xj);
}

/// One parallel stretch-move iteration (both groups, group 0 first).
template <TargetModel T, class Exec = SerialExecutor>
IterationStats stretch_move_iteration(EnsembleState& state, const T& target, const StretchParams& params,
                                      const RngPlan& plan, std::uint64_t m, const Exec& exec = {}) {
  params.validate();
  const Eigen::Index d = state.ensemble.dim();
  return update_halves(state, exec, [&](int, std::size_t i, const IndexRange& comp) {
    Stream partners = plan.stream(m, i, DrawRole::partners);
    Stream noise = plan.stream(m, i, DrawRole::noise);
    Stream accept = plan.stream(m, i, DrawRole::accept);

    const std::size_t j = comp.begin + partners.below(comp.size());
    const double z = sample_stretch_z(params.a, noise.uniform());
    Eigen::VectorXd proposal = stretch_propose(state.ensemble.walker(i), state.ensemble.walker(j), z);
    const double lp = target.log_density(proposal);
    const double log_ratio = std::isfinite(lp)
                                 ? stretch_log_acceptance(z, d, lp, state.log_density(static_cast<Eigen::Index>(i)))
                                 : -INFINITY;
    WalkerOutcome out;
    if (metropolis_accept(log_ratio, accept)) {
      out.accepted = true;
      out.squared_jump = (proposal - state.ensemble.walker(i)).squaredNorm();
      state.ensemble.walker(i) = proposal;
      state.log_density(static_cast<Eigen::Index>(i)) = lp;
    }
    return out;
  });
}

}  // namespace aies
