#pragma once

// Standard HMC and the two ensemble Hamiltonian moves. All three draw a fresh
// momentum every iteration, integrate with leapfrog_n (or its batched form)
// and accept with min{1, exp(-ΔH)}.

#include "aies/executor.hpp"
#include "aies/leapfrog.hpp"
#include "aies/state.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aies {

struct HmcParams {
  LeapfrogParams leapfrog;
};

/// subset == 0 uses the whole complementary group for B, shared by every
/// walker of the active group. A smaller subset gives each walker its own B.
struct HamiltonianWalkParams {
  LeapfrogParams leapfrog;
  std::size_t subset = 0;

  std::size_t resolved_subset(std::size_t half) const { return subset == 0 ? half : subset; }
};

struct HamiltonianSideParams {
  LeapfrogParams leapfrog;
};

/// -ΔH = log pi(x~) - |p~|^2/2 - log pi(x) + |p|^2/2; non-finite means reject.
inline double hamiltonian_log_ratio(double lp_new, double kinetic_new, double lp_old, double kinetic_old) {
  const double r = (lp_new - kinetic_new) - (lp_old - kinetic_old);
  return std::isfinite(r) ? r : -INFINITY;
}

inline Eigen::VectorXd draw_momentum(Stream& s, Eigen::Index dim) {
  Eigen::VectorXd p(dim);
  for (Eigen::Index k = 0; k < dim; ++k) p(k) = s.normal();
  return p;
}

namespace detail {

template <TargetModel T>
WalkerOutcome hamiltonian_update(EnsembleState& state, std::size_t i, const T& target, const Preconditioner& b,
                                 const LeapfrogParams& lf, Stream& noise, Stream& accept) {
  PhasePoint start{state.ensemble.walker(i), draw_momentum(noise, b.momentum_dim())};
  const PhasePoint end = leapfrog_n(start, b, lf, target);
  const double lp = target.log_density(end.x);
  const double log_ratio =
      end.finite() ? hamiltonian_log_ratio(lp, 0.5 * end.p.squaredNorm(), state.log_density(static_cast<Eigen::Index>(i)),
                                           0.5 * start.p.squaredNorm())
                   : -INFINITY;
  WalkerOutcome out;
  if (metropolis_accept(log_ratio, accept)) {
    out.accepted = true;
    out.squared_jump = (end.x - start.x).squaredNorm();
    state.ensemble.walker(i) = end.x;
    state.log_density(static_cast<Eigen::Index>(i)) = lp;
  }
  return out;
}

}  // namespace detail

/// Standard HMC with identity mass matrix: every walker is an independent chain.
template <TargetModel T, class Exec = SerialExecutor>
IterationStats hmc_iteration(EnsembleState& state, const T& target, const HmcParams& params, const RngPlan& plan,
                             std::uint64_t m, const Exec& exec = {}) {
  params.leapfrog.validate();
  const Preconditioner b = Preconditioner::identity(state.ensemble.dim());
  return update_halves(state, exec, [&](int, std::size_t i, const IndexRange&) {
    Stream noise = plan.stream(m, i, DrawRole::noise);
    Stream accept = plan.stream(m, i, DrawRole::accept);
    return detail::hamiltonian_update(state, i, target, b, params.leapfrog, noise, accept);
  });
}

/// Hamiltonian walk move with B the normalized centered complementary group.
template <TargetModel T, class Exec = SerialExecutor>
IterationStats hamiltonian_walk_iteration(EnsembleState& state, const T& target, const HamiltonianWalkParams& params,
                                          const RngPlan& plan, std::uint64_t m, const Exec& exec = {}) {
  params.leapfrog.validate();
  const std::size_t half = state.ensemble.half_size();
  const std::size_t s_size = params.resolved_subset(half);
  if (s_size < 2 || s_size > half) throw std::invalid_argument("hamiltonian walk: subset size must be in [2, N/2]");

  if (s_size < half) {
    const Eigen::Index d = state.ensemble.dim();
    return update_halves(state, exec, [&](int, std::size_t i, const IndexRange& comp) {
      Stream partners = plan.stream(m, i, DrawRole::partners);
      Stream noise = plan.stream(m, i, DrawRole::noise);
      Stream accept = plan.stream(m, i, DrawRole::accept);
      const std::vector<std::size_t> idx = draw_subset(partners, comp, s_size);
      Eigen::MatrixXd sub(d, static_cast<Eigen::Index>(s_size));
      for (std::size_t c = 0; c < s_size; ++c) sub.col(static_cast<Eigen::Index>(c)) = state.ensemble.walker(idx[c]);
      return detail::hamiltonian_update(state, i, target, Preconditioner::centered_ensemble(sub), params.leapfrog,
                                        noise, accept);
    });
  }

  // Full complement: one B per half step, all walkers of the group integrated
  // together so each kick and drift is a single matrix product.
  IterationStats stats;
  for (int s = 0; s < 2; ++s) {
    const IndexRange group = group_range(state.ensemble, s);
    const IndexRange comp = group_range(state.ensemble, 1 - s);
    const Preconditioner b = Preconditioner::centered_ensemble(state.ensemble.group_block(comp));
    const auto k = static_cast<Eigen::Index>(group.size());
    Eigen::MatrixXd x = state.ensemble.group_block(group);
    Eigen::MatrixXd p(b.momentum_dim(), k);
    exec(group, [&](std::size_t i) {
      Stream noise = plan.stream(m, i, DrawRole::noise);
      p.col(static_cast<Eigen::Index>(i - group.begin)) = draw_momentum(noise, b.momentum_dim());
    });
    const Eigen::VectorXd kinetic0 = 0.5 * p.colwise().squaredNorm().transpose();
    leapfrog_batch(x, p, b, params.leapfrog, target, exec);

    std::vector<WalkerOutcome> outcome(group.size());
    exec(group, [&](std::size_t i) {
      const auto c = static_cast<Eigen::Index>(i - group.begin);
      Stream accept = plan.stream(m, i, DrawRole::accept);
      const double lp = target.log_density(x.col(c));
      const bool finite = x.col(c).allFinite() && p.col(c).allFinite();
      const double log_ratio =
          finite ? hamiltonian_log_ratio(lp, 0.5 * p.col(c).squaredNorm(),
                                         state.log_density(static_cast<Eigen::Index>(i)), kinetic0(c))
                 : -INFINITY;
      WalkerOutcome& out = outcome[i - group.begin];
      if (metropolis_accept(log_ratio, accept)) {
        out.accepted = true;
        out.squared_jump = (x.col(c) - state.ensemble.walker(i)).squaredNorm();
        state.ensemble.walker(i) = x.col(c);
        state.log_density(static_cast<Eigen::Index>(i)) = lp;
      }
    });
    for (const WalkerOutcome& out : outcome) {
      stats.counts.proposed[s] += 1;
      if (out.accepted) {
        stats.counts.accepted[s] += 1;
        stats.squared_jump_sum += out.squared_jump;
      }
    }
  }
  return stats;
}

/// Hamiltonian side move: scalar momentum along (x_j - x_k) / sqrt(2d).
template <TargetModel T, class Exec = SerialExecutor>
IterationStats hamiltonian_side_iteration(EnsembleState& state, const T& target, const HamiltonianSideParams& params,
                                          const RngPlan& plan, std::uint64_t m, const Exec& exec = {}) {
  params.leapfrog.validate();
  return update_halves(state, exec, [&](int, std::size_t i, const IndexRange& comp) {
    Stream partners = plan.stream(m, i, DrawRole::partners);
    Stream noise = plan.stream(m, i, DrawRole::noise);
    Stream accept = plan.stream(m, i, DrawRole::accept);
    const auto [j, k] = draw_distinct_pair(partners, comp);
    const Preconditioner b = Preconditioner::side_direction(state.ensemble.walker(j), state.ensemble.walker(k));
    return detail::hamiltonian_update(state, i, target, b, params.leapfrog, noise, accept);
  });
}

}  // namespace aies
