#pragma once

#include "aies/ensemble.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace aies {

/// (1/N) sum_i f(x_i)
template <class F>
double ensemble_mean(const Ensemble& e, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) sum += f(e.walker(i));
  return sum / static_cast<double>(e.size());
}

template <class F>
std::vector<double> ensemble_observable_series(const std::vector<Ensemble>& history, F&& f) {
  if (history.empty()) throw std::invalid_argument("ensemble_observable_series: empty history");
  std::vector<double> out;
  out.reserve(history.size());
  for (const Ensemble& e : history) out.push_back(ensemble_mean(e, f));
  return out;
}

/// Biased autocovariance C(m) = (1/M) sum_t (x_t - mean)(x_{t+m} - mean),
/// m = 0..M-1, through a zero-padded FFT.
inline std::vector<double> autocovariance(const std::vector<double>& series) {
  const std::size_t m = series.size();
  if (m < 4) throw std::invalid_argument("autocovariance: series needs at least 4 points");
  bool constant = true;
  for (double v : series) constant = constant && v == series.front();
  if (constant) throw std::domain_error("autocovariance: zero variance");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(m);

  std::size_t n = 1;
  while (n < 2 * m) n <<= 1;
  std::vector<double> padded(n, 0.0);
  for (std::size_t t = 0; t < m; ++t) padded[t] = series[t] - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> back;
  fft.inv(back, spectrum);

  std::vector<double> c(m);
  for (std::size_t k = 0; k < m; ++k) c[k] = back[k] / static_cast<double>(m);
  return c;
}

/// rho(m) = C(m) / C(0).
inline std::vector<double> autocorrelation(const std::vector<double>& series) {
  std::vector<double> c = autocovariance(series);
  const double c0 = c.front();
  for (double& v : c) v /= c0;
  c.front() = 1.0;
  return c;
}

struct ActEstimate {
  std::vector<double> acf;
  double tau = 1.0;
  std::size_t window = 0;
  std::size_t thin = 1;     // thinning already applied to the series, for reporting
  bool converged = true;
};

/// tau(W) = 1 + 2 sum_{m=1}^{W} rho(m) at the smallest W with W >= c tau(W).
/// If no such W <= M/2 exists the estimate at W = M/2 is returned unconverged.
inline ActEstimate integrated_act(std::vector<double> acf, double c = 5.0, std::size_t thin = 1) {
  if (acf.empty()) throw std::invalid_argument("integrated_act: empty autocorrelation");
  if (!(c > 0.0)) throw std::invalid_argument("integrated_act: window constant must be > 0");
  ActEstimate est;
  est.thin = thin;
  const std::size_t max_window = acf.size() / 2;
  double tau = 1.0;
  est.converged = false;
  std::size_t w = 0;
  for (w = 1; w <= max_window; ++w) {
    tau += 2.0 * acf[w];
    if (static_cast<double>(w) >= c * tau) {
      est.converged = true;
      break;
    }
  }
  est.tau = tau;
  est.window = std::min(w, max_window);
  est.acf = std::move(acf);
  return est;
}

inline ActEstimate estimate_act(const std::vector<double>& series, double c = 5.0, std::size_t thin = 1) {
  return integrated_act(autocorrelation(series), c, thin);
}

/// Mean over consecutive pairs and walkers of |x(m+1) - x(m)|^2.
inline double esjd(const std::vector<Ensemble>& history) {
  if (history.size() < 2) throw std::invalid_argument("esjd: need at least two recorded iterations");
  double sum = 0.0;
  for (std::size_t t = 1; t < history.size(); ++t)
    sum += (history[t].positions() - history[t - 1].positions()).colwise().squaredNorm().sum();
  return sum / static_cast<double>((history.size() - 1) * history.front().size());
}

}  // namespace aies
