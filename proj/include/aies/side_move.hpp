#pragma once

#include "aies/executor.hpp"
#include "aies/state.hpp"

#include <cmath>
#include <stdexcept>

namespace aies {

enum class NoiseKind { gaussian, uniform };

/// Side move x_i + sigma * xi * (x_j - x_k), xi ~ N(0,1) or Unif[-1,1].
struct SideParams {
  double sigma = 1.0;
  NoiseKind noise = NoiseKind::gaussian;

  /// sigma = alpha / sqrt(d) with the ESJD-optimal alpha for the noise kind:
  /// 1.687 for Gaussian xi, sqrt(3/2) * 2.151 for uniform xi.
  static SideParams for_dimension(Eigen::Index d, NoiseKind kind = NoiseKind::gaussian) {
    const double alpha = kind == NoiseKind::gaussian ? 1.687 : std::sqrt(1.5) * 2.151;
    return {alpha / std::sqrt(static_cast<double>(d)), kind};
  }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("side move: sigma must be > 0");
  }
};

inline double draw_side_noise(Stream& s, NoiseKind kind) {
  return kind == NoiseKind::gaussian ? s.normal() : 2.0 * s.uniform() - 1.0;
}

inline Eigen::VectorXd side_propose(const ConstVecRef& xi, const ConstVecRef& xj, const ConstVecRef& xk,
                                    double step) {
  return xi + step * (xj - xk);
}

/// One parallel side-move iteration. Partners j != k come from the complementary group.
template <TargetModel T, class Exec = SerialExecutor>
IterationStats side_move_iteration(EnsembleState& state, const T& target, const SideParams& params,
                                   const RngPlan& plan, std::uint64_t m, const Exec& exec = {}) {
  params.validate();
  return update_halves(state, exec, [&](int, std::size_t i, const IndexRange& comp) {
    Stream partners = plan.stream(m, i, DrawRole::partners);
    Stream noise = plan.stream(m, i, DrawRole::noise);
    Stream accept = plan.stream(m, i, DrawRole::accept);

    const auto [j, k] = draw_distinct_pair(partners, comp);
    const double xi = draw_side_noise(noise, params.noise);
    Eigen::VectorXd proposal =
        side_propose(state.ensemble.walker(i), state.ensemble.walker(j), state.ensemble.walker(k), params.sigma * xi);
    const double lp = target.log_density(proposal);
    const double log_ratio = std::isfinite(lp) ? lp - state.log_density(static_cast<Eigen::Index>(i)) : -INFINITY;
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
