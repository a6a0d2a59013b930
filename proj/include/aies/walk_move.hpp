#pragma once

#include "aies/executor.hpp"
#include "aies/state.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aies {

/// Walk move over a random subset S of the complementary group. subset == 0
/// means the whole complementary group.
struct WalkParams {
  std::size_t subset = 0;

  std::size_t resolved_subset(std::size_t half) const { return subset == 0 ? half : subset; }

  void validate(std::size_t half) const {
    const std::size_t s = resolved_subset(half);
    if (s < 2 || s > half) throw std::invalid_argument("walk move: subset size must be in [2, N/2]");
  }
};

/// x_i + |S|^{-1/2} * sum_j (x_j - m_S) xi_j, with the subset's walkers as columns of `subset`.
inline Eigen::VectorXd walk_propose(const ConstVecRef& xi, const Eigen::Ref<const Eigen::MatrixXd>& subset,
                                    const ConstVecRef& noise) {
  const Eigen::VectorXd mean = subset.rowwise().mean();
  Eigen::VectorXd step = (subset.colwise() - mean) * noise;
  return xi + step / std::sqrt(static_cast<double>(subset.cols()));
}

template <TargetModel T, class Exec = SerialExecutor>
IterationStats walk_move_iteration(EnsembleState& state, const T& target, const WalkParams& params, const RngPlan& plan,
                                   std::uint64_t m, const Exec& exec = {}) {
  const std::size_t half = state.ensemble.half_size();
  params.validate(half);
  const std::size_t s_size = params.resolved_subset(half);
  const Eigen::Index d = state.ensemble.dim();
  return update_halves(state, exec, [&](int, std::size_t i, const IndexRange& comp) {
    Stream partners = plan.stream(m, i, DrawRole::partners);
    Stream noise = plan.stream(m, i, DrawRole::noise);
    Stream accept = plan.stream(m, i, DrawRole::accept);

    const std::vector<std::size_t> idx = draw_subset(partners, comp, s_size);
    Eigen::MatrixXd subset(d, static_cast<Eigen::Index>(s_size));
    for (std::size_t c = 0; c < s_size; ++c) subset.col(static_cast<Eigen::Index>(c)) = state.ensemble.walker(idx[c]);
    Eigen::VectorXd xi(static_cast<Eigen::Index>(s_size));
    for (Eigen::Index c = 0; c < xi.size(); ++c) xi(c) = noise.normal();

    Eigen::VectorXd proposal = walk_propose(state.ensemble.walker(i), subset, xi);
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
