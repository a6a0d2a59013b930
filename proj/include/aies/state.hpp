#pragma once

// Sampler state and the half-group update scaffold shared by every move.

#include "aies/ensemble.hpp"
#include "aies/rng.hpp"
#include "aies/target.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace aies {

/// Accepted / proposed counts, kept separately for the two groups.
struct AcceptCounts {
  std::array<std::uint64_t, 2> accepted{};
  std::array<std::uint64_t, 2> proposed{};

  AcceptCounts& operator+=(const AcceptCounts& o) {
    for (int s = 0; s < 2; ++s) {
      accepted[s] += o.accepted[s];
      proposed[s] += o.proposed[s];
    }
    return *this;
  }

  std::uint64_t total_accepted() const { return accepted[0] + accepted[1]; }
  std::uint64_t total_proposed() const { return proposed[0] + proposed[1]; }
  double rate() const {
    const auto p = total_proposed();
    return p == 0 ? 0.0 : static_cast<double>(total_accepted()) / static_cast<double>(p);
  }
};

/// What one iteration of a kernel did.
struct IterationStats {
  AcceptCounts counts;
  double squared_jump_sum = 0.0;  // sum over walkers of |x(m+1) - x(m)|^2
};

/// Ensemble plus the cached log density of every walker, so each proposal
/// costs exactly one new log-density evaluation.
struct EnsembleState {
  Ensemble ensemble;
  Eigen::VectorXd log_density;

  template <TargetModel T>
  EnsembleState(Ensemble e, const T& target) : ensemble(std::move(e)), log_density(ensemble.size()) {
    if (target.dim() != ensemble.dim()) throw std::invalid_argument("EnsembleState: target/ensemble dimension mismatch");
    for (std::size_t i = 0; i < ensemble.size(); ++i)
      log_density(static_cast<Eigen::Index>(i)) = target.log_density(ensemble.walker(i));
  }
};

/// Walkers drawn i.i.d. from N(0, I_d), one initial stream per walker.
inline Ensemble standard_normal_ensemble(const RngPlan& plan, Eigen::Index dim, std::size_t n_walkers) {
  Eigen::MatrixXd x(dim, static_cast<Eigen::Index>(n_walkers));
  for (std::size_t i = 0; i < n_walkers; ++i) {
    Stream s = plan.initial_stream(i);
    for (Eigen::Index k = 0; k < dim; ++k) x(k, static_cast<Eigen::Index>(i)) = s.normal();
  }
  return Ensemble(std::move(x));
}

/// Metropolis decision in the log domain: accept iff log u < log_ratio.
/// A non-finite log ratio (NaN, or -inf from an invalid proposal) rejects.
inline bool metropolis_accept(double log_ratio, Stream& accept_stream) {
  const double u = accept_stream.uniform();
  if (std::isnan(log_ratio)) return false;
  return std::log(u) < log_ratio;
}

/// Outcome of one walker update, written only by the walker's own task.
struct WalkerOutcome {
  bool accepted = false;
  double squared_jump = 0.0;
};

/// Runs group 0 then group 1. `update(s, i, complement)` proposes for walker
/// i of group s, may overwrite only walker i's position and cached density,
/// and must read partners only from `complement`.
template <class Exec, class Update>
IterationStats update_halves(EnsembleState& state, const Exec& exec, Update&& update) {
  IterationStats stats;
  std::vector<WalkerOutcome> outcome(state.ensemble.size());
  for (int s = 0; s < 2; ++s) {
    const IndexRange group = group_range(state.ensemble, s);
    const IndexRange complement = group_range(state.ensemble, 1 - s);
    exec(group, [&](std::size_t i) { outcome[i] = update(s, i, complement); });
    for (std::size_t i = group.begin; i < group.end; ++i) {
      stats.counts.proposed[s] += 1;
      if (outcome[i].accepted) {
        stats.counts.accepted[s] += 1;
        stats.squared_jump_sum += outcome[i].squared_jump;
      }
    }
  }
  return stats;
}

/// Two distinct indices drawn uniformly from a range of size >= 2.
inline std::pair<std::size_t, std::size_t> draw_distinct_pair(Stream& s, const IndexRange& r) {
  const std::size_t n = r.size();
  const std::size_t j = s.below(n);
  std::size_t k = s.below(n - 1);
  if (k >= j) ++k;
  return {r.begin + j, r.begin + k};
}

/// `count` distinct indices from a range, by partial Fisher-Yates.
inline std::vector<std::size_t> draw_subset(Stream& s, const IndexRange& r, std::size_t count) {
  std::vector<std::size_t> idx(r.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = r.begin + k;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + s.below(idx.size() - k);
    std::swap(idx[k], idx[pick]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace aies
