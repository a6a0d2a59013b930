#pragma once

// Target contract: pi ∝ exp(-V). A target reports its dimension, the log
// density -V(x) (up to an additive constant), and the gradient -∇V(x).

#include "aies/ensemble.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <concepts>
#include <cstdint>

namespace aies {

using ConstVecRef = Eigen::Ref<const Eigen::VectorXd>;
using VecRef = Eigen::Ref<Eigen::VectorXd>;

template <class T>
concept TargetModel = requires(const T& t, const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  { t.dim() } -> std::convertible_to<Eigen::Index>;
  { t.log_density(x) } -> std::convertible_to<double>;
  t.grad_log_density(x, g);
};

struct EvalCounts {
  std::uint64_t log_density = 0;
  std::uint64_t gradient = 0;
};

/// Wraps a target and counts evaluations. Counters are atomic so kernels may
/// evaluate walkers concurrently.
template <TargetModel T>
class CountingTarget {
 public:
  explicit CountingTarget(const T& base) : base_(base) {}

  Eigen::Index dim() const { return base_.dim(); }

  double log_density(const ConstVecRef& x) const {
    log_density_calls_.fetch_add(1, std::memory_order_relaxed);
    return base_.log_density(x);
  }

  void grad_log_density(const ConstVecRef& x, VecRef g) const {
    gradient_calls_.fetch_add(1, std::memory_order_relaxed);
    base_.grad_log_density(x, g);
  }

  EvalCounts counts() const {
    return {log_density_calls_.load(std::memory_order_relaxed), gradient_calls_.load(std::memory_order_relaxed)};
  }

  void reset() {
    log_density_calls_.store(0);
    gradient_calls_.store(0);
  }

  const T& base() const { return base_; }

 private:
  const T& base_;
  mutable std::atomic<std::uint64_t> log_density_calls_{0};
  mutable std::atomic<std::uint64_t> gradient_calls_{0};
};

/// Pushforward of a target through y = A x + b: log density V(phi^{-1}(y)).
/// The constant log|det A| is dropped; samplers only ever use differences.
template <TargetModel T>
class PushforwardTarget {
 public:
  PushforwardTarget(const T& base, AffineMap map) : base_(base), map_(std::move(map)) {}

  Eigen::Index dim() const { return base_.dim(); }

  double log_density(const ConstVecRef& y) const { return base_.log_density(map_.solve(y)); }

  void grad_log_density(const ConstVecRef& y, VecRef g) const {
    Eigen::VectorXd gx(base_.dim());
    base_.grad_log_density(map_.solve(y), gx);
    g = map_.solve_transpose(gx);
  }

  const AffineMap& map() const { return map_; }

 private:
  const T& base_;
  AffineMap map_;
};

}  // namespace aies
