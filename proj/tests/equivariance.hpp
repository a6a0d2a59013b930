#pragma once

#include "aies/ensemble.hpp"
#include "aies/rng.hpp"
#include "aies/state.hpp"
#include "aies/target.hpp"

#include <algorithm>
#include <cstdint>

namespace aies::testing {

inline constexpr std::uint64_t kSteps = 1000;

inline AffineMap random_map(Eigen::Index d, std::uint64_t seed) {
  Stream s = RngPlan{seed}.stream(0, 0, DrawRole::noise);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = 0.5 * s.normal();
  a += 2.0 * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b(d);
  for (Eigen::Index k = 0; k < d; ++k) b(k) = 3.0 * s.normal();
  return AffineMap(a, b);
}

inline AffineMap shear(Eigen::Index d) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index k = 0; k + 1 < d; ++k) a(k, k + 1) = 1.5;
  return AffineMap(a, Eigen::VectorXd::Constant(d, 0.7));
}

enum class Mode { trajectory, stepwise };

inline double walker_error(const Ensemble& mapped, const Ensemble& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    worst = std::max(worst, (mapped.walker(i) - y.walker(i)).norm() / y.walker(i).norm());
  return worst;
}

/// Largest walker-wise relative discrepancy between the mapped chain and the
/// chain on the pushforward target.
template <class T, class Sampler>
double equivariance_error(const T& base, const AffineMap& map, std::size_t walkers, Sampler&& sampler,
                          Mode mode = Mode::trajectory) {
  const RngPlan plan{2024};
  const PushforwardTarget<T> push(base, map);
  EnsembleState x(standard_normal_ensemble(plan, base.dim(), walkers), base);
  EnsembleState y(apply_affine(x.ensemble, map), push);
  double worst = 0.0;
  for (std::uint64_t m = 0; m < kSteps; ++m) {
    if (mode == Mode::stepwise) y = EnsembleState(apply_affine(x.ensemble, map), push);
    sampler(x, base, plan, m);
    sampler(y, push, plan, m);
    if (mode == Mode::stepwise) worst = std::max(worst, walker_error(apply_affine(x.ensemble, map), y.ensemble));
  }
  return mode == Mode::stepwise ? worst : walker_error(apply_affine(x.ensemble, map), y.ensemble);
}

}  // namespace aies::testing
