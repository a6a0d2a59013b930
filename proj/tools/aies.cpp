// aies: run samplers, dimension sweeps, limit curves and IAT estimates.

#include "aies/asymptotics.hpp"
#include "aies/diagnostics.hpp"
#include "aies/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using aies::format_double;

std::vector<Eigen::Index> parse_dims(const std::string& s) {
  std::vector<Eigen::Index> dims;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size() || v < 1) throw aies::ConfigError("bad dimension '" + tok + "'");
    dims.push_back(static_cast<Eigen::Index>(v));
  }
  return dims;
}

struct Grid {
  double lo, hi;
  int steps;
};

Grid parse_grid(const std::string& s) {
  Grid g{};
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.steps) || c1 != ':' || c2 != ':' || !is.eof())
    throw aies::ConfigError("grid must look like a:b:steps");
  if (!(g.lo < g.hi) || g.steps < 2) throw aies::ConfigError("grid needs a < b and steps >= 2");
  return g;
}

std::vector<double> read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw aies::ConfigError("cannot open series " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find_last_of(',');
    const std::string field = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      out.push_back(v);
    } catch (const std::exception&) {
      if (!out.empty()) throw aies::ConfigError("non-numeric value in series: " + line);
      // header line
    }
  }
  return out;
}

int cmd_sample(const std::string& config, const std::string& preset, const std::string& out) {
  aies::ExperimentConfig cfg = aies::load_config(config);
  if (!preset.empty()) aies::apply_preset(cfg, preset);
  aies::validate(cfg);
  const aies::ExperimentResult r = aies::run_experiment(cfg);
  aies::write_experiment(r, out);
  std::cout << aies::summary_json(r).dump(2) << '\n';
  if (!r.act) std::cerr << "warning: no autocorrelation estimate (" << r.act_error << ")\n";
  else if (!r.act->converged) std::cerr << "warning: tau window did not converge; estimate is a lower bound\n";
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& preset, const std::string& dims, const std::string& out,
              unsigned jobs) {
  aies::ExperimentConfig cfg = aies::load_config(config);
  if (!preset.empty()) aies::apply_preset(cfg, preset);
  const auto rows = aies::run_scaling_sweep(cfg, parse_dims(dims), jobs);
  if (out.empty() || out == "-") {
    aies::write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream os(out);
    aies::write_sweep_csv(os, rows);
  }
  return 0;
}

struct LimitsOptions {
  std::string family = "side";
  std::string grid;
  bool optimize = false;
  std::uint64_t n_mc = 1000000;
  std::uint64_t seed = aies::kDefaultSeed;
  std::string noise = "gaussian";
  double rho = 0.25;
  double horizon = 1.0;
  int steps = 3;
  double tol = 1e-3;
};

int cmd_limits(const LimitsOptions& o) {
  aies::LimitNoise noise;
  if (o.noise == "gaussian") noise = aies::LimitNoise::gaussian;
  else if (o.noise == "uniform") noise = aies::LimitNoise::uniform;
  else throw aies::ConfigError("noise must be gaussian or uniform");

  std::function<aies::LimitPair(double)> eval;
  if (o.family == "side") {
    eval = [&](double a) { return aies::side_limit(a, noise, o.n_mc, o.seed); };
  } else if (o.family == "stretch") {
    eval = [&](double b) { return aies::stretch_limit(b, o.n_mc, o.seed); };
  } else if (o.family == "hwalk") {
    eval = [&](double a) {
      const aies::HwalkLimit l = aies::hwalk_limit(a, o.rho, o.horizon);
      return aies::LimitPair{{l.acceptance, 0.0, 0}, {l.esjd_per_dim, 0.0, 0}};
    };
  } else if (o.family == "hside") {
    eval = [&](double a) { return aies::hside_limit(a, o.steps, o.n_mc, o.seed); };
  } else {
    throw aies::ConfigError("family must be side, stretch, hwalk or hside");
  }

  const Grid g = parse_grid(o.grid);
  std::cout << "param,acceptance,acc_stderr,esjd,esjd_stderr\n";
  auto row = [&](double p) {
    const aies::LimitPair v = eval(p);
    std::cout << format_double(p) << ',' << format_double(v.acceptance.value) << ','
              << format_double(v.acceptance.std_error) << ',' << format_double(v.esjd.value) << ','
              << format_double(v.esjd.std_error) << '\n';
  };
  if (o.optimize) {
    const aies::Optimum best = aies::optimize_limit([&](double p) { return eval(p).esjd.value; }, g.lo, g.hi, o.tol);
    row(best.param);
  } else {
    for (int k = 0; k < g.steps; ++k) row(g.lo + (g.hi - g.lo) * k / (g.steps - 1));
  }
  return 0;
}

int cmd_act(const std::string& series, double c, std::size_t thin) {
  const std::vector<double> xs = read_series(series);
  const aies::ActEstimate est = aies::estimate_act(xs, c, thin);
  const nlohmann::json j = {{"tau", est.tau}, {"window", est.window}, {"converged", est.converged},
                            {"thin", est.thin}, {"c", c}, {"length", xs.size()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affine-invariant ensemble samplers: experiments, sweeps, limits and IAT estimates"};
  app.require_subcommand(1);

  std::string config, preset, out = "out", dims, sweep_out;
  unsigned jobs = 1;

  auto* sample = app.add_subcommand("sample", "run one experiment from a JSON config");
  sample->add_option("--config", config, "config file")->required();
  sample->add_option("--preset", preset, "desk or paper (overrides counts in the config)");
  sample->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "run one experiment per dimension with N = 2d");
  sweep->add_option("--config", config, "base config file")->required();
  sweep->add_option("--preset", preset, "desk or paper");
  sweep->add_option("--dims", dims, "comma-separated ascending dimensions")->required();
  sweep->add_option("--out", sweep_out, "CSV file (default stdout)");
  sweep->add_option("--jobs", jobs, "concurrent runs");

  LimitsOptions lim;
  auto* limits = app.add_subcommand("limits", "high-dimensional acceptance and ESJD limits");
  limits->add_option("--family", lim.family, "side, stretch, hwalk or hside")->required();
  limits->add_option("--grid", lim.grid, "a:b:steps (with --optimize, the bracket [a, b])")->required();
  limits->add_flag("--optimize", lim.optimize, "golden-section search for the ESJD maximum");
  limits->add_option("--n-mc", lim.n_mc, "Monte Carlo samples per evaluation");
  limits->add_option("--seed", lim.seed, "seed (common random numbers across the grid)");
  limits->add_option("--noise", lim.noise, "side noise: gaussian or uniform");
  limits->add_option("--rho", lim.rho, "hwalk ratio d / (N/2)");
  limits->add_option("--T", lim.horizon, "hwalk integration time");
  limits->add_option("--steps", lim.steps, "hside leapfrog steps");
  limits->add_option("--tol", lim.tol, "optimizer bracket tolerance");

  std::string series;
  double c = 5.0;
  std::size_t thin = 1;
  auto* act = app.add_subcommand("act", "integrated autocorrelation time of a series CSV");
  act->add_option("--series", series, "CSV; the last column is used")->required();
  act->add_option("--c", c, "window constant");
  act->add_option("--thin", thin, "thinning already applied (reported only)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return cmd_sample(config, preset, out);
    if (*sweep) return cmd_sweep(config, preset, dims, sweep_out, jobs);
    if (*limits) return cmd_limits(lim);
    if (*act) return cmd_act(series, c, thin);
  } catch (const aies::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
