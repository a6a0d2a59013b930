#pragma once

// Experiment runner behind the `aies` command line tool.
//
// A config is one flat JSON object, for example
//   {"target": "gaussian", "d": 128, "kappa": 1000, "sampler": "side"}
// Unknown keys are rejected. Omitted counts default to burn-in 2e5 and 1e6
// sampling iterations ("paper" preset); the "desk" preset divides both by 10.

#include "aies/chain.hpp"
#include "aies/diagnostics.hpp"
#include "aies/ensemble_io.hpp"
#include "aies/executor.hpp"
#include "aies/hamiltonian.hpp"
#include "aies/side_move.hpp"
#include "aies/stretch_move.hpp"
#include "aies/targets.hpp"
#include "aies/walk_move.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace aies {

/// Raised for any invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr const char* kSeedEnvVar = "AIES_SEED";

struct TargetConfig {
  std::string kind = "gaussian";  // gaussian | ring | allen_cahn
  Eigen::Index dim = 2;
  double kappa = 1.0;
  double lambda_min = 0.1;
  double width = 0.25;  // ring l
};

struct SamplerConfig {
  std::string kind = "side";  // stretch | side | walk | hmc | hwalk | hside
  std::optional<double> a;
  std::optional<double> sigma;
  NoiseKind noise = NoiseKind::gaussian;
  std::size_t subset = 0;
  double horizon = 1.0;
  int steps = 10;
  std::optional<double> step;  // overrides horizon / steps when given

  bool uses_gradients() const { return kind == "hmc" || kind == "hwalk" || kind == "hside"; }

  LeapfrogParams leapfrog() const {
    LeapfrogParams lf = step ? LeapfrogParams{*step, steps} : LeapfrogParams::from_horizon(horizon, steps);
    lf.validate();
    return lf;
  }
};

struct ExperimentConfig {
  TargetConfig target;
  SamplerConfig sampler;
  std::size_t walkers = 0;  // 0 means 2d
  double init_scale = 1.0;  // walkers start i.i.d. N(0, init_scale^2 I)
  std::uint64_t burn_in = 200000;
  std::uint64_t iterations = 1000000;
  std::size_t thin = 10;
  std::uint64_t seed = kDefaultSeed;
  std::string observable;  // empty: x1, or path_integral for allen_cahn
  double window_c = 5.0;
  unsigned threads = 1;
  bool save_ensemble = false;

  std::size_t resolved_walkers() const { return walkers == 0 ? static_cast<std::size_t>(2 * target.dim) : walkers; }
  std::string resolved_observable() const {
    if (!observable.empty()) return observable;
    return target.kind == "allen_cahn" ? "path_integral" : "x1";
  }
};

/// Burn-in and sampling counts of a named preset.
inline void apply_preset(ExperimentConfig& cfg, const std::string& preset) {
  if (preset == "desk") {
    cfg.burn_in = 20000;
    cfg.iterations = 100000;
  } else if (preset == "paper") {
    cfg.burn_in = 200000;
    cfg.iterations = 1000000;
  } else {
    throw ConfigError("unknown preset '" + preset + "' (expected desk or paper)");
  }
}

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnvVar); env && *env) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned integer");
  }
  return kDefaultSeed;
}

inline void validate(const ExperimentConfig& cfg) {
  const auto& t = cfg.target;
  if (t.kind != "gaussian" && t.kind != "ring" && t.kind != "allen_cahn")
    throw ConfigError("unknown target '" + t.kind + "'");
  if (t.dim < 1) throw ConfigError("d must be >= 1");
  if (t.kind == "allen_cahn" && t.dim < 2) throw ConfigError("allen_cahn needs d >= 2");
  if (t.kind == "gaussian" && (!(t.kappa >= 1.0) || !(t.lambda_min > 0.0)))
    throw ConfigError("gaussian needs kappa >= 1 and lambda_min > 0");
  if (t.kind == "ring" && !(t.width > 0.0)) throw ConfigError("ring needs l > 0");

  const std::size_t n = cfg.resolved_walkers();
  if (n < 4 || n % 2 != 0) throw ConfigError("N must be even and >= 4");
  if (cfg.thin < 1) throw ConfigError("thin must be >= 1");
  if (cfg.iterations < cfg.thin) throw ConfigError("iterations must be >= thin");
  if (!(cfg.window_c > 0.0)) throw ConfigError("c must be > 0");
  if (!(cfg.init_scale > 0.0) || !std::isfinite(cfg.init_scale)) throw ConfigError("init_scale must be > 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");

  const std::string obs = cfg.resolved_observable();
  if (obs != "x1" && obs != "path_integral") throw ConfigError("unknown observable '" + obs + "'");
  if (obs == "path_integral" && t.dim < 2) throw ConfigError("path_integral needs d >= 2");

  const auto& s = cfg.sampler;
  static const std::set<std::string> kinds{"stretch", "side", "walk", "hmc", "hwalk", "hside"};
  if (!kinds.count(s.kind)) throw ConfigError("unknown sampler '" + s.kind + "'");
  if (s.a && !(*s.a > 1.0)) throw ConfigError("stretch a must be > 1");
  if (s.sigma && !(*s.sigma > 0.0)) throw ConfigError("side sigma must be > 0");
  if ((s.kind == "walk" || s.kind == "hwalk") && s.subset != 0 && (s.subset < 2 || s.subset > n / 2))
    throw ConfigError("subset must be in [2, N/2]");
  if (s.uses_gradients()) {
    if (s.steps < 1) throw ConfigError("n must be >= 1");
    if (s.step ? !(*s.step > 0.0) : !(s.horizon > 0.0)) throw ConfigError("T (or h) must be > 0");
  }
}

/// Parses a flat JSON config. A missing seed falls back to $AIES_SEED, then
/// to kDefaultSeed.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"target", "d",     "kappa", "lambda_min", "l",          "sampler",
                                           "a",      "sigma", "noise", "subset",     "T",          "n",
                                           "h",      "N",     "burn_in", "iterations", "thin",     "seed",
                                           "observable",      "c",     "threads",    "save_ensemble", "init_scale"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  ExperimentConfig cfg;
  try {
    cfg.target.kind = j.value("target", cfg.target.kind);
    if (!j.contains("d")) throw ConfigError("config needs d");
    cfg.target.dim = j.at("d").get<Eigen::Index>();
    cfg.target.kappa = j.value("kappa", cfg.target.kappa);
    cfg.target.lambda_min = j.value("lambda_min", cfg.target.lambda_min);
    cfg.target.width = j.value("l", cfg.target.width);

    auto& s = cfg.sampler;
    s.kind = j.value("sampler", s.kind);
    if (j.contains("a")) s.a = j.at("a").get<double>();
    if (j.contains("sigma")) s.sigma = j.at("sigma").get<double>();
    const std::string noise = j.value("noise", std::string("gaussian"));
    if (noise == "gaussian")
      s.noise = NoiseKind::gaussian;
    else if (noise == "uniform")
      s.noise = NoiseKind::uniform;
    else
      throw ConfigError("noise must be gaussian or uniform");
    s.subset = j.value("subset", s.subset);
    s.horizon = j.value("T", s.horizon);
    s.steps = j.value("n", s.steps);
    if (j.contains("h")) s.step = j.at("h").get<double>();

    cfg.walkers = j.value("N", cfg.walkers);
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.thin = j.value("thin", cfg.thin);
    cfg.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : default_seed();
    cfg.observable = j.value("observable", cfg.observable);
    cfg.window_c = j.value("c", cfg.window_c);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.save_ensemble = j.value("save_ensemble", cfg.save_ensemble);
    cfg.init_scale = j.value("init_scale", cfg.init_scale);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

using AnyTarget = std::variant<GaussianTarget, RingTarget, AllenCahnTarget>;

inline AnyTarget make_target(const TargetConfig& t) {
  if (t.kind == "gaussian") return GaussianTarget(GaussianSpec{t.dim, t.kappa, t.lambda_min});
  if (t.kind == "ring") return RingTarget(RingSpec{t.dim, t.width});
  if (t.kind == "allen_cahn") return AllenCahnTarget(AllenCahnSpec{t.dim});
  throw ConfigError("unknown target '" + t.kind + "'");
}

inline Observable make_observable(const std::string& name) {
  if (name == "x1") return [](const ConstVecRef& x) { return x(0); };
  if (name == "path_integral") return [](const ConstVecRef& x) { return path_integral_observable(x); };
  throw ConfigError("unknown observable '" + name + "'");
}

/// Kernel for the configured sampler. Step sizes left unset take the
/// per-dimension defaults.
template <TargetModel T, class Exec>
Kernel make_kernel(const SamplerConfig& s, const T& target, const RngPlan& plan, const Exec& exec) {
  const Eigen::Index d = target.dim();
  if (s.kind == "stretch") {
    const StretchParams p = s.a ? StretchParams{*s.a} : StretchParams::for_dimension(d);
    p.validate();
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return stretch_move_iteration(st, target, p, plan, m, exec);
    };
  }
  if (s.kind == "side") {
    SideParams p = SideParams::for_dimension(d, s.noise);
    if (s.sigma) p.sigma = *s.sigma;
    p.validate();
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return side_move_iteration(st, target, p, plan, m, exec);
    };
  }
  if (s.kind == "walk") {
    const WalkParams p{s.subset};
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return walk_move_iteration(st, target, p, plan, m, exec);
    };
  }
  const LeapfrogParams lf = s.leapfrog();
  if (s.kind == "hmc") {
    const HmcParams p{lf};
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return hmc_iteration(st, target, p, plan, m, exec);
    };
  }
  if (s.kind == "hwalk") {
    const HamiltonianWalkParams p{lf, s.subset};
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return hamiltonian_walk_iteration(st, target, p, plan, m, exec);
    };
  }
  if (s.kind == "hside") {
    const HamiltonianSideParams p{lf};
    return [&target, p, plan, exec](EnsembleState& st, std::uint64_t m) {
      return hamiltonian_side_iteration(st, target, p, plan, m, exec);
    };
  }
  throw ConfigError("unknown sampler '" + s.kind + "'");
}

struct ExperimentResult {
  ExperimentConfig config;
  ChainRecord record;
  std::optional<ActEstimate> act;  // empty when the series has zero variance
  std::string act_error;
  double func_evals_per_iter = 0.0;  // per walker, measured during sampling
  double grad_evals_per_iter = 0.0;
  double wall_time = 0.0;  // seconds
  std::optional<Ensemble> final_ensemble;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const AnyTarget any = make_target(cfg.target);
  ExperimentResult res;
  res.config = cfg;

  std::visit(
      [&](const auto& base) {
        CountingTarget counting(base);
        const RngPlan plan{cfg.seed};
        const std::size_t n = cfg.resolved_walkers();
        Ensemble start = standard_normal_ensemble(plan, base.dim(), n);
        if (cfg.init_scale != 1.0) start.positions() *= cfg.init_scale;
        EnsembleState state(std::move(start), counting);
        const Observable obs = make_observable(cfg.resolved_observable());
        auto run = [&](const auto& exec) {
          const Kernel kernel = make_kernel(cfg.sampler, counting, plan, exec);
          for (std::uint64_t m = 0; m < cfg.burn_in; ++m) kernel(state, m);
          counting.reset();
          res.record = run_chain(state, kernel, obs, 0, cfg.iterations, cfg.thin, cfg.burn_in);
        };
        if (cfg.threads > 1)
          run(ThreadExecutor(cfg.threads));
        else
          run(SerialExecutor{});
        const double per = static_cast<double>(cfg.iterations) * static_cast<double>(n);
        res.func_evals_per_iter = static_cast<double>(counting.counts().log_density) / per;
        res.grad_evals_per_iter = static_cast<double>(counting.counts().gradient) / per;
        if (cfg.save_ensemble) res.final_ensemble = state.ensemble;
      },
      any);

  try {
    res.act = estimate_act(res.record.series, cfg.window_c, cfg.thin);
  } catch (const std::domain_error& e) {
    res.act_error = e.what();
  } catch (const std::invalid_argument& e) {
    res.act_error = e.what();
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline const char* noise_name(NoiseKind k) { return k == NoiseKind::gaussian ? "gaussian" : "uniform"; }

/// Summary document. Contains no timing, so equal configs give identical bytes.
inline nlohmann::json summary_json(const ExperimentResult& r) {
  const ExperimentConfig& c = r.config;
  nlohmann::json j;
  j["schema"] = 1;
  j["target"] = c.target.kind;
  j["d"] = c.target.dim;
  if (c.target.kind == "gaussian") {
    j["kappa"] = c.target.kappa;
    j["lambda_min"] = c.target.lambda_min;
  }
  if (c.target.kind == "ring") j["l"] = c.target.width;
  j["sampler"] = c.sampler.kind;
  if (c.sampler.uses_gradients()) {
    const LeapfrogParams lf = c.sampler.leapfrog();
    j["h"] = lf.step;
    j["n"] = lf.steps;
    j["T"] = lf.horizon();
  }
  if (c.sampler.kind == "side") j["noise"] = noise_name(c.sampler.noise);
  j["N"] = c.resolved_walkers();
  j["burn_in"] = c.burn_in;
  j["iterations"] = c.iterations;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["init_scale"] = c.init_scale;
  j["observable"] = c.resolved_observable();
  j["c"] = c.window_c;
  j["acceptance_rate"] = r.record.acceptance_rate();
  j["acceptance_by_group"] = {
      r.record.counts.proposed[0] ? double(r.record.counts.accepted[0]) / double(r.record.counts.proposed[0]) : 0.0,
      r.record.counts.proposed[1] ? double(r.record.counts.accepted[1]) / double(r.record.counts.proposed[1]) : 0.0};
  j["esjd"] = r.record.esjd();
  j["func_evals_per_iter"] = r.func_evals_per_iter;
  j["grad_evals_per_iter"] = r.grad_evals_per_iter;
  j["series_length"] = r.record.series.size();
  if (r.act) {
    j["tau"] = r.act->tau;
    j["window"] = r.act->window;
    j["tau_unconverged"] = !r.act->converged;
  } else {
    j["tau"] = nullptr;
    j["window"] = nullptr;
    j["tau_unconverged"] = true;
    j["tau_error"] = r.act_error;
  }
  return j;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

/// Writes summary.json, timing.json, acf.csv, series.csv (and ensemble.bin
/// when requested) into `dir`.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "summary.json");
    os << summary_json(r).dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "timing.json");
    os << nlohmann::json{{"wall_time", r.wall_time}}.dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "acf.csv");
    os << "lag,rho\n";
    if (r.act) {
      // Lags past twice the window carry no information worth keeping.
      const std::size_t last = std::min(r.act->acf.size(), std::max<std::size_t>(4 * r.act->window, 100));
      for (std::size_t k = 0; k < last; ++k) os << k << ',' << format_double(r.act->acf[k]) << '\n';
    }
  }
  {
    std::ofstream os(dir / "series.csv");
    os << "iteration,value\n";
    for (std::size_t k = 0; k < r.record.series.size(); ++k)
      os << (k + 1) * r.record.thin << ',' << format_double(r.record.series[k]) << '\n';
  }
  if (r.final_ensemble) {
    std::ofstream os(dir / "ensemble.bin", std::ios::binary);
    write_ensemble(os, *r.final_ensemble, r.config.seed, r.config.burn_in + r.config.iterations);
  }
}

struct SweepRow {
  Eigen::Index d = 0;
  std::string sampler;
  std::optional<double> tau;
  double acceptance = 0.0;
  std::size_t window = 0;
  bool tau_unconverged = false;
  std::string error;
};

/// Config for dimension d: N = 2d and per-dimension step-size defaults.
inline ExperimentConfig sweep_config(ExperimentConfig base, Eigen::Index d) {
  base.target.dim = d;
  base.walkers = 0;
  base.sampler.a.reset();
  base.sampler.sigma.reset();
  return base;
}

/// One experiment per dimension. Failures are reported in the row. With
/// jobs > 1 runs execute concurrently; each run is deterministic, so the
/// rows do not depend on jobs.
inline std::vector<SweepRow> run_scaling_sweep(const ExperimentConfig& base, const std::vector<Eigen::Index>& dims,
                                               unsigned jobs = 1) {
  if (dims.empty()) throw ConfigError("sweep needs at least one dimension");
  for (std::size_t k = 1; k < dims.size(); ++k)
    if (dims[k] <= dims[k - 1]) throw ConfigError("sweep dimensions must be strictly ascending");

  std::vector<SweepRow> rows(dims.size());
  auto one = [&](std::size_t k) {
    SweepRow& row = rows[k];
    row.d = dims[k];
    row.sampler = base.sampler.kind;
    try {
      const ExperimentResult r = run_experiment(sweep_config(base, dims[k]));
      row.acceptance = r.record.acceptance_rate();
      if (r.act) {
        row.tau = r.act->tau;
        row.window = r.act->window;
        row.tau_unconverged = !r.act->converged;
      } else {
        row.error = r.act_error;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  if (jobs <= 1) {
    for (std::size_t k = 0; k < dims.size(); ++k) one(k);
  } else {
    const ThreadExecutor pool(jobs);
    pool(IndexRange{0, dims.size()}, one);
  }
  return rows;
}

/// Error text with the CSV separators replaced so a row stays one record.
inline std::string csv_field(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ch == ',' ? ';' : ' ';
  return s;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "d,sampler,tau,acceptance,window,tau_unconverged,error\n";
  for (const SweepRow& r : rows) {
    os << r.d << ',' << r.sampler << ',' << (r.tau ? format_double(*r.tau) : "") << ',' << format_double(r.acceptance)
       << ',' << r.window << ',' << (r.tau_unconverged ? "true" : "false") << ',' << csv_field(r.error) << '\n';
  }
}

}  // namespace aies
