#pragma once

// High-dimensional limits of acceptance and ESJD for the side, stretch,
// Hamiltonian walk and Hamiltonian side moves on isotropic Gaussians.

#include "aies/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace aies {

struct LimitEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
};

struct LimitPair {
  LimitEstimate acceptance;
  LimitEstimate esjd;
};

/// acceptance weight and ESJD contribution of one Monte Carlo draw
struct LimitSample {
  double acceptance;
  double esjd;
};

namespace detail {

inline constexpr std::uint64_t kMinLimitSamples = 1000;
inline constexpr std::uint64_t kShardSize = 1u << 16;

inline LimitEstimate finish(double sum, double sum_sq, std::uint64_t n) {
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean) * static_cast<double>(n) /
                     static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

/// Mean of draw(stream) over n samples split into fixed-size shards; shard s
/// uses the stream (s, 0, noise) of `seed`, so the result depends only on
/// (seed, n) and the same seed gives common random numbers across parameters.
template <class Draw>
LimitPair monte_carlo(Draw&& draw, std::uint64_t n, std::uint64_t seed) {
  if (n < kMinLimitSamples) throw std::invalid_argument("limit: n_mc must be >= 1000");
  const RngPlan plan{seed};
  double sa = 0, sa2 = 0, se = 0, se2 = 0;
  for (std::uint64_t begin = 0, shard = 0; begin < n; begin += kShardSize, ++shard) {
    Stream s = plan.stream(shard, 0, DrawRole::noise);
    const std::uint64_t end = std::min(n, begin + kShardSize);
    double a = 0, a2 = 0, e = 0, e2 = 0;
    for (std::uint64_t k = begin; k < end; ++k) {
      const LimitSample v = draw(s);
      a += v.acceptance;
      a2 += v.acceptance * v.acceptance;
      e += v.esjd;
      e2 += v.esjd * v.esjd;
    }
    sa += a;
    sa2 += a2;
    se += e;
    se2 += e2;
  }
  return {finish(sa, sa2, n), finish(se, se2, n)};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace detail

enum class LimitNoise { gaussian, uniform };

/// Side move, xi and z given: min{1, exp(-a^2 xi^2 - sqrt2 a xi z)} and 2 a^2 xi^2 times it.
inline LimitSample side_integrand(double alpha, double xi, double z) {
  const double acc = std::min(1.0, std::exp(-alpha * alpha * xi * xi - std::numbers::sqrt2 * alpha * xi * z));
  return {acc, 2.0 * alpha * alpha * xi * xi * acc};
}

/// Stretch move, U in [-1, 1] and z given: min{1, exp(-1.5 b^2 U^2 - sqrt3 b U z)} and 2 b^2 U^2 times it.
inline LimitSample stretch_integrand(double beta, double u, double z) {
  const double acc = std::min(1.0, std::exp(-1.5 * beta * beta * u * u - std::numbers::sqrt3 * beta * u * z));
  return {acc, 2.0 * beta * beta * u * u * acc};
}

inline LimitPair side_limit(double alpha, LimitNoise noise, std::uint64_t n_mc, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw std::invalid_argument("side_limit: alpha must be > 0");
  return detail::monte_carlo(
      [&](Stream& s) {
        const double xi = noise == LimitNoise::gaussian ? s.normal() : 2.0 * s.uniform() - 1.0;
        return side_integrand(alpha, xi, s.normal());
      },
      n_mc, seed);
}

inline LimitPair stretch_limit(double beta, std::uint64_t n_mc, std::uint64_t seed) {
  if (!(beta > 0.0)) throw std::invalid_argument("stretch_limit: beta must be > 0");
  return detail::monte_carlo(
      [&](Stream& s) {
        const double u = 2.0 * s.uniform() - 1.0;
        return stretch_integrand(beta, u, s.normal());
      },
      n_mc, seed);
}

struct Optimum {
  double param = 0.0;
  double value = 0.0;
};

/// Golden-section search for the maximum of `curve` on [lo, hi]. Throws if
/// neither interior golden point beats both endpoints.
inline Optimum optimize_limit(const std::function<double(double)>& curve, double lo, double hi, double tol = 1e-4) {
  if (!(lo < hi)) throw std::invalid_argument("optimize_limit: need lo < hi");
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = curve(c), fd = curve(d);
  const double fa = curve(a), fb = curve(b);
  if (std::max(fc, fd) <= std::max(fa, fb)) throw std::invalid_argument("optimize_limit: bracket does not contain a maximum");
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = curve(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = curve(d);
    }
  }
  return fc > fd ? Optimum{c, fc} : Optimum{d, fd};
}

/// Marchenko-Pastur law with ratio rho in [0, 1): density
/// sqrt((c - l)(l - b)) / (2 pi rho l) on [b, c], b = (1 - sqrt rho)^2,
/// c = (1 + sqrt rho)^2; rho = 0 is the point mass at 1.
class MPLaw {
 public:
  explicit MPLaw(double rho) : rho_(rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("MPLaw: rho must be in [0, 1)");
    lo_ = (1.0 - std::sqrt(rho)) * (1.0 - std::sqrt(rho));
    hi_ = (1.0 + std::sqrt(rho)) * (1.0 + std::sqrt(rho));
  }

  double rho() const noexcept { return rho_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }

  double density(double lambda) const {
    if (rho_ == 0.0 || lambda <= lo_ || lambda >= hi_) return 0.0;
    return std::sqrt((hi_ - lambda) * (lambda - lo_)) / (2.0 * std::numbers::pi * rho_ * lambda);
  }

  /// ∫ f dν. With l = b + (c - b) sin^2 t the square-root edges cancel and the
  /// integrand on [0, pi/2] is smooth.
  double integrate(const std::function<double(double)>& f) const {
    if (rho_ == 0.0) return f(1.0);
    const double w = hi_ - lo_;
    auto g = [&](double t) {
      const double s = std::sin(t), c = std::cos(t);
      const double lambda = lo_ + w * s * s;
      return f(lambda) * w * w * s * s * c * c / (std::numbers::pi * rho_ * lambda);
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, std::numbers::pi / 2, 15, 1e-13);
  }

 private:
  double rho_;
  double lo_ = 1.0;
  double hi_ = 1.0;
};

struct MPMoments {
  double mean;      // mu_rho
  double variance;  // sigma_rho
};

/// mu = -(1/32) ∫ l^2 sin^2(sqrt(l) T) dν, sigma = (1/16) ∫ l^2 sin^2(sqrt(l) T) dν.
inline MPMoments mp_moments(double rho, double horizon) {
  const MPLaw law(rho);
  const double m2 = law.integrate([&](double l) {
    const double s = std::sin(std::sqrt(l) * horizon);
    return l * l * s * s;
  });
  return {-m2 / 32.0, m2 / 16.0};
}

/// E[min{1, e^X}] for X ~ N(m, v), in closed form.
inline double lognormal_acceptance(double m, double v) {
  if (v <= 0.0) return std::min(1.0, std::exp(m));
  const double s = std::sqrt(v);
  return detail::normal_cdf(m / s) + std::exp(m + 0.5 * v) * detail::normal_cdf(-s - m / s);
}

struct HwalkLimit {
  double acceptance;
  double esjd_per_dim;  // (1/d) E|Δx|^2
};

/// Hamiltonian walk move with h = alpha d^{-1/4}, horizon T and rho = d / (N/2).
inline HwalkLimit hwalk_limit(double alpha, double rho, double horizon) {
  if (!(alpha > 0.0)) throw std::invalid_argument("hwalk_limit: alpha must be > 0");
  const MPMoments mom = mp_moments(rho, horizon);
  const double a4 = alpha * alpha * alpha * alpha;
  const double acc = lognormal_acceptance(a4 * mom.mean, a4 * mom.variance);
  const double jump = MPLaw(rho).integrate([&](double l) {
    const double s = std::sin(0.5 * std::sqrt(l) * horizon);
    return 4.0 * s * s;
  });
  return {acc, jump * acc};
}

inline double hwalk_limit_acceptance(double alpha, double rho, double horizon) {
  return hwalk_limit(alpha, rho, horizon).acceptance;
}

/// Monte Carlo version of hwalk_limit_acceptance, used as a cross-check.
inline LimitEstimate hwalk_limit_acceptance_mc(double alpha, double rho, double horizon, std::uint64_t n_mc,
                                               std::uint64_t seed) {
  const MPMoments mom = mp_moments(rho, horizon);
  const double a4 = alpha * alpha * alpha * alpha;
  const double m = a4 * mom.mean, s = std::sqrt(a4 * mom.variance);
  return detail::monte_carlo(
             [&](Stream& st) {
               return LimitSample{std::min(1.0, std::exp(m + s * st.normal())), 0.0};
             },
             n_mc, seed)
      .acceptance;
}

/// Hamiltonian side move with step alpha and n steps. With phi = acos(1 - a^2/2),
/// z1 ~ N(0,1), z2 ~ N(0, 1/(1 - a^2/4)):
///   P = (a^2/8)(sin^2(n phi)(z1^2 - z2^2) - sin(2 n phi) z1 z2),
///   Q = ((cos(n phi) - 1) z1 + sin(n phi) z2)^2,
/// acceptance E[min{1, e^P}], ESJD E[Q min{1, e^P}].
inline LimitPair hside_limit(double alpha, int steps, std::uint64_t n_mc, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("hside_limit: alpha must be in (0, 2)");
  if (steps < 1) throw std::invalid_argument("hside_limit: steps must be >= 1");
  const double phi = std::acos(1.0 - 0.5 * alpha * alpha);
  const double sn = std::sin(steps * phi), cn = std::cos(steps * phi), s2n = std::sin(2.0 * steps * phi);
  const double z2_scale = 1.0 / std::sqrt(1.0 - 0.25 * alpha * alpha);
  return detail::monte_carlo(
      [&](Stream& s) {
        const double z1 = s.normal();
        const double z2 = z2_scale * s.normal();
        const double p = alpha * alpha / 8.0 * (sn * sn * (z1 * z1 - z2 * z2) - s2n * z1 * z2);
        const double disp = (cn - 1.0) * z1 + sn * z2;
        const double acc = std::min(1.0, std::exp(p));
        return LimitSample{acc, disp * disp * acc};
      },
      n_mc, seed);
}

}  // namespace aies
