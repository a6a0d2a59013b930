#pragma once

#include "aies/diagnostics.hpp"
#include "aies/state.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace aies {

/// Thinned ensemble-mean observable series plus acceptance and jump tallies
/// for the sampling phase of a run.
struct ChainRecord {
  std::vector<double> series;
  std::size_t thin = 1;
  AcceptCounts counts;
  double squared_jump_sum = 0.0;
  std::uint64_t iterations = 0;
  std::size_t walkers = 0;

  double acceptance_rate() const { return counts.rate(); }

  /// Mean over iterations and walkers of |x(m+1) - x(m)|^2.
  double esjd() const {
    if (iterations == 0 || walkers == 0) return 0.0;
    return squared_jump_sum / (static_cast<double>(iterations) * static_cast<double>(walkers));
  }
};

/// One iteration of some sampler: kernel(state, m).
using Kernel = std::function<IterationStats(EnsembleState&, std::uint64_t)>;
using Observable = std::function<double(const ConstVecRef&)>;

/// Runs `burn_in` iterations, then `iterations` recorded ones. Iteration
/// indices continue across the two phases so every step has its own streams.
/// The observable is recorded after iterations thin, 2 thin, ...
inline ChainRecord run_chain(EnsembleState& state, const Kernel& kernel, const Observable& observable,
                             std::uint64_t burn_in, std::uint64_t iterations, std::size_t thin,
                             std::uint64_t first_iteration = 0) {
  if (thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
  for (std::uint64_t m = 0; m < burn_in; ++m) kernel(state, first_iteration + m);

  ChainRecord rec;
  rec.thin = thin;
  rec.walkers = state.ensemble.size();
  rec.series.reserve(static_cast<std::size_t>(iterations / thin));
  for (std::uint64_t m = 0; m < iterations; ++m) {
    const IterationStats st = kernel(state, first_iteration + burn_in + m);
    rec.counts += st.counts;
    rec.squared_jump_sum += st.squared_jump_sum;
    ++rec.iterations;
    if ((m + 1) % thin == 0) rec.series.push_back(ensemble_mean(state.ensemble, observable));
  }
  return rec;
}

}  // namespace aies
