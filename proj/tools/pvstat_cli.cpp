// pvstat: batch runs over the point-vortex library with machine-readable output.
//
// Exit status: 0 success, 2 invalid input, 3 non-convergence, 1 anything else.
// Every run writes manifest.json into --out-dir listing each artifact with its
// sha256.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "manifest.hpp"
#include "pvstat/io.hpp"
#include "pvstat/pvstat.hpp"

namespace {

using pvstat::io::json;
using pvstat::cli::RunManifest;

struct Global {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool has_seed = false;
  unsigned threads = 1;
  std::optional<double> beta_min;
};

/// Accumulates every offending parameter before failing.
class Problems {
public:
  void check(bool ok, const std::string& what) {
    if (!ok) list_.push_back(what);
  }
  void raise() const {
    if (list_.empty()) return;
    std::string msg = "invalid parameters:";
    for (const auto& p : list_) msg += "\n  " + p;
    throw pvstat::InvalidArgument(msg);
  }

private:
  std::vector<std::string> list_;
};

pvstat::BetaWindow window(const Global& g) {
  pvstat::BetaWindow w;
  if (g.beta_min) w.min = *g.beta_min;
  return w;
}

/// Runs fn(0..count-1) on up to `threads` workers. Cells share no state.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string rows_to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + r[k];
    out += '\n';
  }
  return out;
}

std::string num(double v) { return pvstat::io::format_double(v); }

// --- sample -----------------------------------------------------------------

struct SampleArgs {
  int n = 0;
  double beta = 0.0;
  std::optional<double> lambda;
  std::size_t steps = 0;
  std::optional<double> step_size;
  std::size_t m = 16;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t replicates = 1;
  double side = 1.0;
  bool tune = false;
  std::string out = "chain.jsonl";
};

void run_sample(const SampleArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  p.check(g.has_seed, "--seed is required for sampling");
  p.check(a.n >= 1, "--n must be >= 1");
  p.check(a.steps > a.burn_in, "--steps must exceed --burn-in");
  p.check(a.thin >= 1, "--thin must be >= 1");
  p.check(a.replicates >= 1, "--replicates must be >= 1");
  p.check(a.m >= 1, "--m must be >= 1");
  p.check(a.side > 0.0 && std::isfinite(a.side), "--side must be positive");
  p.check(!a.lambda || (*a.lambda != 0.0 && std::isfinite(*a.lambda)), "--lambda must be finite and non-zero");
  p.check(std::isfinite(a.beta), "--beta must be finite");
  const double step = a.step_size.value_or(0.5 * a.side / std::sqrt(double(std::max<std::size_t>(a.m, 1))));
  p.check(step > 0.0 && step <= a.side, "--step-size must lie in (0, side]");
  p.raise();

  const double lambda = a.lambda.value_or(1.0 / double(a.n));
  const pvstat::Domain domain(a.side);
  const std::filesystem::path out(a.out);
  parallel_for(a.replicates, g.threads, [&](std::size_t r) {
    const std::uint64_t seed = g.seed + r;
    man.add_seed(seed);
    pvstat::SamplerConfig cfg;
    cfg.beta = pvstat::raw_beta(a.beta, lambda, std::size_t(a.n));
    cfg.steps = a.steps;
    cfg.step_size = step;
    cfg.seed = seed;
    cfg.thin = a.thin;
    cfg.burn_in = a.burn_in;
    cfg.tune_step_size = a.tune;
    if (g.beta_min) cfg.scaled_beta_min = *g.beta_min;
    const auto initial = pvstat::uniform_configuration(domain, std::size_t(a.n), lambda, seed);
    const auto chain = pvstat::sample_canonical(initial, cfg);
    const json provenance = {{"command", "sample"},
                             {"pvstat", pvstat::version},
                             {"scaled_beta", a.beta},
                             {"replicate", r},
                             {"seed", seed}};
    const std::string name = a.replicates == 1
                                 ? out.string()
                                 : (out.parent_path() / (out.stem().string() + "_r" + std::to_string(r) +
                                                         out.extension().string()))
                                       .string();
    man.emit(name, pvstat::io::chain_to_jsonl(chain, provenance));
  });
}

// --- bounds -----------------------------------------------------------------

struct BoundsArgs {
  int n = 0;
  std::size_t m = 0;
  std::optional<double> beta;
  std::string sweep;
  std::optional<double> lambda;
  std::string mode = "full";
  bool no_oracle = false;
  std::size_t panels = 0;
  double side = 1.0;
  std::string out = "report.json";
};

std::vector<double> parse_sweep(const std::string& s, Problems& p) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
    p.check(false, "--beta-sweep must be start:stop:count");
    return out;
  }
  try {
    const double start = std::stod(a), stop = std::stod(b);
    const int count = std::stoi(c);
    if (count < 1) {
      p.check(false, "--beta-sweep count must be >= 1");
      return out;
    }
    for (int k = 0; k < count; ++k)
      out.push_back(count == 1 ? start : start + (stop - start) * double(k) / double(count - 1));
  } catch (const std::exception&) {
    p.check(false, "--beta-sweep must be start:stop:count with numeric fields");
  }
  return out;
}

void run_bounds(const BoundsArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  p.check(a.n >= 1, "--n must be >= 1");
  p.check(a.m >= 1, "--m must be >= 1");
  p.check(a.beta.has_value() != !a.sweep.empty(), "exactly one of --beta and --beta-sweep is required");
  p.check(a.side > 0.0, "--side must be positive");
  p.check(!a.lambda || *a.lambda != 0.0, "--lambda must be non-zero");
  std::vector<double> betas;
  if (a.beta) betas.push_back(*a.beta);
  if (!a.sweep.empty()) betas = parse_sweep(a.sweep, p);
  for (double b : betas) p.check(b != 0.0, "beta = 0 has no free energy");
  const bool oracle = !a.no_oracle && a.n <= 3;
  p.raise();

  const double lambda = a.lambda.value_or(1.0 / double(a.n));
  const auto grid = pvstat::CoarseGrid::with_box_count(pvstat::Domain(a.side), a.m);
  const auto w = window(g);
  std::vector<json> reports(betas.size());
  parallel_for(betas.size(), g.threads, [&](std::size_t k) {
    w.require(betas[k]);
    pvstat::FreeEnergyOptions opt;
    opt.mode = a.mode == "landau" ? pvstat::FreeEnergyMode::landau : pvstat::FreeEnergyMode::full;
    opt.with_oracle = oracle;
    opt.oracle.panels = a.panels;
    const auto r = pvstat::f_var(a.n, grid, pvstat::raw_beta(betas[k], lambda, std::size_t(a.n)), lambda, opt);
    reports[k] = pvstat::io::to_json(r);
    reports[k]["scaled_beta"] = betas[k];
  });
  if (a.beta) {
    man.emit(a.out, reports.front().dump(2) + '\n');
    return;
  }
  man.emit(a.out, json(reports).dump(2) + '\n');
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    const auto opt_num = [](const json& v) { return v.is_null() ? std::string() : v.dump(); };
    rows.push_back({num(r["scaled_beta"].get<double>()), num(r["beta"].get<double>()), num(r["f0"].get<double>()),
                    num(r["f_var"].get<double>()), num(r["f_var_gibbs"].get<double>()),
                    num(r["truncation_term"].get<double>()), opt_num(r["f_exact"]), num(r["tolerance"].get<double>()),
                    opt_num(r["bound_satisfied"])});
  }
  const auto csv_path = std::filesystem::path(a.out).replace_extension(".csv").string();
  man.emit(csv_path, rows_to_csv({"scaled_beta", "beta", "f0", "f_var", "f_var_gibbs", "truncation_term",
                                  "f_exact", "tolerance", "bound_satisfied"},
                                 rows));
}

// --- solve-finite -----------------------------------------------------------

struct FiniteArgs {
  int n = 0;
  std::size_t m = 0;
  double beta = 0.0;
  std::optional<double> lambda;
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  double side = 1.0;
  std::string out = "occupations.json";
};

void run_solve_finite(const FiniteArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  p.check(a.n >= 1, "--n must be >= 1");
  p.check(a.side > 0.0, "--side must be positive");
  p.check(a.tol > 0.0, "--tol must be positive");
  p.check(!a.lambda || *a.lambda != 0.0, "--lambda must be non-zero");
  p.raise();
  const std::size_t m = a.m ? a.m : std::size_t(a.n);
  const double lambda = a.lambda.value_or(1.0 / double(a.n));
  const auto grid = pvstat::CoarseGrid::with_box_count(pvstat::Domain(a.side), m);
  pvstat::FixedPointOptions opt;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.window = window(g);
  const auto sol =
      pvstat::occupation_fixed_point(grid, a.n, pvstat::raw_beta(a.beta, lambda, std::size_t(a.n)), lambda, opt);
  const auto f = pvstat::scaling_limits(sol, grid);
  json j = pvstat::io::to_json(sol);
  j["scaled_beta"] = a.beta;
  j["grid"] = {{"nx", grid.nx()}, {"ny", grid.ny()}, {"h", grid.h()}};
  j["stationarity_residual"] = pvstat::stationarity_residual(sol, grid);
  j["scaled_fields"] = {{"xi", f.xi}, {"d", f.d}, {"e0", f.e0}, {"e1", f.e1}, {"e1_bound", f.e1_bound}};
  man.emit(a.out, j.dump(2) + '\n');
}

// --- solve-pde --------------------------------------------------------------

struct PdeArgs {
  double beta = 0.0;
  std::size_t mesh = 0;
  bool limit = false;
  std::optional<int> finite_n;
  std::size_t boxes = 0;
  double tol = 1e-12;
  std::size_t max_iter = 5000;
  double side = 1.0;
};

void run_solve_pde(const PdeArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  p.check(a.mesh >= 16, "--mesh must be >= 16");
  p.check(!a.finite_n || *a.finite_n >= 1, "--finite-n must be >= 1");
  p.check(a.side > 0.0, "--side must be positive");
  p.check(a.tol > 0.0, "--tol must be positive");
  p.raise();
  pvstat::ContinuumOptions opt;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.window = window(g);
  if (a.finite_n) {
    opt.include_e1 = true;
    opt.n_for_e1 = *a.finite_n;
    opt.boxes_for_e1 = a.boxes;
  }
  const auto mf = pvstat::solve_continuum(a.beta, a.mesh, pvstat::Domain(a.side), opt);
  const std::size_t res = mf.mesh.resolution();
  man.emit("mean_field.json", pvstat::io::to_json(mf).dump(2) + '\n');
  man.emit("xi.csv", pvstat::io::field_to_csv(mf.xi, res));
  man.emit("e0.csv", pvstat::io::field_to_csv(mf.e0, res));
  man.emit("psi.csv", pvstat::io::field_to_csv(mf.psi, res));
  if (mf.include_e1) man.emit("e1.csv", pvstat::io::field_to_csv(mf.e1, res));
}

// --- sinh-poisson -----------------------------------------------------------

struct SinhArgs {
  double beta = 0.0;
  std::size_t mesh = 0;
  double seed_amplitude = 0.1;
  bool swap = false;
  double tol = 1e-12;
  std::size_t max_iter = 20000;
  double side = 1.0;
};

void run_sinh(const SinhArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  p.check(a.mesh >= 16, "--mesh must be >= 16");
  p.check(a.side > 0.0, "--side must be positive");
  p.check(a.tol > 0.0, "--tol must be positive");
  p.check(std::abs(a.seed_amplitude) < 1.0, "--seed-amplitude must lie in (-1, 1)");
  p.raise();
  pvstat::SinhPoissonOptions opt;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.seed_amplitude = a.seed_amplitude;
  opt.swap_species = a.swap;
  opt.window = window(g);
  const auto f = pvstat::solve_sinh_poisson(a.beta, a.mesh, pvstat::Domain(a.side), opt);
  const std::size_t res = f.mesh.resolution();
  man.emit("sinh_poisson.json", pvstat::io::to_json(f).dump(2) + '\n');
  man.emit("omega.csv", pvstat::io::field_to_csv(f.omega, res));
  man.emit("xi_plus.csv", pvstat::io::field_to_csv(f.xi_plus, res));
  man.emit("xi_minus.csv", pvstat::io::field_to_csv(f.xi_minus, res));
  man.emit("e0.csv", pvstat::io::field_to_csv(f.e0, res));
}

// --- converge / decay -------------------------------------------------------

struct StudyArgs {
  std::vector<int> n_list;
  double beta = 0.0;
  std::size_t mesh = 128;
  double side = 1.0;
};

void check_n_list(const std::vector<int>& ns, Problems& p) {
  p.check(!ns.empty(), "--n-list must not be empty");
  for (int n : ns) p.check(n >= 1, "--n-list entries must be >= 1 (got " + std::to_string(n) + ")");
}

void run_converge(const StudyArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  check_n_list(a.n_list, p);
  p.check(a.mesh >= 16, "--mesh must be >= 16");
  p.check(a.side > 0.0, "--side must be positive");
  p.raise();
  pvstat::FixedPointOptions fp;
  fp.window = window(g);
  pvstat::ContinuumOptions co;
  co.window = window(g);
  const auto study = pvstat::finite_vs_continuum(a.n_list, a.beta, a.mesh, pvstat::Domain(a.side),
                                                 pvstat::boxes_equal_particles(), fp, co);
  json j = pvstat::io::to_json(study);
  j["beta"] = a.beta;
  j["mesh"] = a.mesh;
  man.emit("converge.json", j.dump(2) + '\n');
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : study.rows)
    rows.push_back({std::to_string(r.n), std::to_string(r.m), std::to_string(r.nx), std::to_string(r.ny),
                    num(r.l1_distance)});
  man.emit("converge.csv", rows_to_csv({"n", "m", "nx", "ny", "l1_distance"}, rows));
}

void run_decay(const StudyArgs& a, const Global& g, RunManifest& man) {
  Problems p;
  check_n_list(a.n_list, p);
  p.check(a.side > 0.0, "--side must be positive");
  p.raise();
  pvstat::FixedPointOptions fp;
  fp.window = window(g);
  const auto study = pvstat::self_energy_decay_study(a.n_list, a.beta, pvstat::boxes_equal_particles(),
                                                     pvstat::Domain(a.side), fp);
  json j = pvstat::io::to_json(study);
  j["beta"] = a.beta;
  man.emit("decay.json", j.dump(2) + '\n');
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : study.rows)
    rows.push_back({std::to_string(r.n), std::to_string(r.m), num(r.max_abs_e1), num(r.bound),
                    r.all_within_bound ? "true" : "false"});
  man.emit("decay.csv", rows_to_csv({"n", "m", "max_abs_e1", "bound", "all_within_bound"}, rows));
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-vortex statistical mechanics: sampling, bounds and mean-field solvers", "pvstat"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", pvstat::version);
  app.option_defaults()->always_capture_default();

  Global g;
  double beta_min = pvstat::default_scaled_beta_min;
  app.add_option("--out-dir", g.out_dir, "Directory for all outputs and manifest.json");
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for all randomness");
  app.add_option("--threads", g.threads, "Worker threads for replicate and sweep cells")->check(CLI::PositiveNumber);
  auto* beta_min_opt =
      app.add_option("--beta-min", beta_min, "Lower edge of the admissible scaled beta window");

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Metropolis chain of exp(-beta H), JSON-lines output");
  sample->add_option("--n", sa.n, "Number of vortices")->required();
  sample->add_option("--beta", sa.beta, "Scaled inverse temperature beta lambda^2 N")->required();
  sample->add_option("--lambda", sa.lambda, "Vortex strength (default 1/N)");
  sample->add_option("--steps", sa.steps, "Sweeps, including burn-in")->required();
  sample->add_option("--step-size", sa.step_size, "Proposal half-width (default h/2 for --m boxes)");
  sample->add_option("--m", sa.m, "Box count defining the default step size");
  sample->add_option("--burn-in", sa.burn_in, "Unrecorded initial sweeps");
  sample->add_option("--thin", sa.thin, "Record every k-th sweep");
  sample->add_option("--replicates", sa.replicates, "Independent chains with seeds seed, seed+1, ...");
  sample->add_option("--side", sa.side, "Domain side");
  sample->add_flag("--tune-step-size", sa.tune, "Adapt the step size during burn-in");
  sample->add_option("--out", sa.out, "Chain file, relative to --out-dir");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Macrostate enumeration and variational free energies");
  bounds->add_option("--n", ba.n, "Number of vortices")->required();
  bounds->add_option("--m", ba.m, "Number of boxes")->required();
  bounds->add_option("--beta", ba.beta, "Scaled inverse temperature");
  bounds->add_option("--beta-sweep", ba.sweep, "start:stop:count");
  bounds->add_option("--lambda", ba.lambda, "Vortex strength (default 1/N)");
  bounds->add_option("--mode", ba.mode, "landau or full")->check(CLI::IsMember({"landau", "full"}));
  bounds->add_flag("--no-oracle", ba.no_oracle, "Skip the quadrature oracle");
  bounds->add_option("--panels", ba.panels, "Oracle panels per axis (0 = default)");
  bounds->add_option("--side", ba.side, "Domain side");
  bounds->add_option("--out", ba.out, "Report file, relative to --out-dir");

  FiniteArgs fa;
  auto* finite = app.add_subcommand("solve-finite", "Finite-N occupation fixed point");
  finite->add_option("--n", fa.n, "Number of vortices")->required();
  finite->add_option("--m", fa.m, "Number of boxes (default N)");
  finite->add_option("--beta", fa.beta, "Scaled inverse temperature")->required();
  finite->add_option("--lambda", fa.lambda, "Vortex strength (default 1/N)");
  finite->add_option("--tol", fa.tol, "Residual tolerance");
  finite->add_option("--max-iter", fa.max_iter, "Iteration limit");
  finite->add_option("--side", fa.side, "Domain side");
  finite->add_option("--out", fa.out, "Output file, relative to --out-dir");

  PdeArgs pa;
  auto* pde = app.add_subcommand("solve-pde", "Continuum mean-field equation on a P x P mesh");
  pde->add_option("--beta", pa.beta, "Scaled inverse temperature")->required();
  pde->add_option("--mesh", pa.mesh, "Mesh resolution P")->required();
  auto* limit = pde->add_flag("--limit", pa.limit, "Large-N limit equation (default)");
  pde->add_option("--finite-n", pa.finite_n, "Include the self-energy field for N vortices")->excludes(limit);
  pde->add_option("--boxes", pa.boxes, "Box count for the self-energy field (default N)");
  pde->add_option("--tol", pa.tol, "Residual tolerance");
  pde->add_option("--max-iter", pa.max_iter, "Iteration limit");
  pde->add_option("--side", pa.side, "Domain side");

  SinhArgs sh;
  auto* sinh = app.add_subcommand("sinh-poisson", "Two-species mean-field equation");
  sinh->add_option("--beta", sh.beta, "Scaled inverse temperature")->required();
  sinh->add_option("--mesh", sh.mesh, "Mesh resolution P")->required();
  sinh->add_option("--seed-amplitude", sh.seed_amplitude, "Amplitude of the initial species imbalance");
  sinh->add_flag("--swap-species", sh.swap, "Start from the species-swapped state");
  sinh->add_option("--tol", sh.tol, "Residual tolerance");
  sinh->add_option("--max-iter", sh.max_iter, "Iteration limit");
  sinh->add_option("--side", sh.side, "Domain side");

  StudyArgs ca;
  auto* converge = app.add_subcommand("converge", "L1 distance between finite-N and continuum densities");
  converge->add_option("--n-list", ca.n_list, "Comma-separated N values")->required()->delimiter(',');
  converge->add_option("--beta", ca.beta, "Scaled inverse temperature")->required();
  converge->add_option("--mesh", ca.mesh, "Continuum mesh resolution");
  converge->add_option("--side", ca.side, "Domain side");

  StudyArgs da;
  auto* decay = app.add_subcommand("decay", "Self-energy field against its bound, M = N");
  decay->add_option("--n-list", da.n_list, "Comma-separated N values")->required()->delimiter(',');
  decay->add_option("--beta", da.beta, "Scaled inverse temperature")->required();
  decay->add_option("--side", da.side, "Domain side");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  g.has_seed = seed_opt->count() > 0;
  if (beta_min_opt->count()) g.beta_min = beta_min;

  CLI::App* sub = app.get_subcommands().front();
  json parameters = {{"out_dir", g.out_dir}, {"threads", g.threads}};
  if (g.has_seed) parameters["seed"] = g.seed;
  if (g.beta_min) parameters["beta_min"] = *g.beta_min;
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help") continue;
    const std::string key = opt->get_name().substr(2);
    if (opt->count() == 0) {
      parameters[key] = opt->get_default_str().empty() ? json(nullptr) : json(opt->get_default_str());
      continue;
    }
    const auto results = opt->results();
    parameters[key] = results.size() == 1 ? json(results.front()) : json(results);
  }

  RunManifest man(g.out_dir, sub->get_name(), parameters);
  int status = 0;
  std::string label = "ok";
  try {
    if (sub == sample) run_sample(sa, g, man);
    else if (sub == bounds) run_bounds(ba, g, man);
    else if (sub == finite) run_solve_finite(fa, g, man);
    else if (sub == pde) run_solve_pde(pa, g, man);
    else if (sub == sinh) run_sinh(sh, g, man);
    else if (sub == converge) run_converge(ca, g, man);
    else if (sub == decay) run_decay(da, g, man);
  } catch (const pvstat::IterationLimit& e) {
    std::cerr << "pvstat: " << e.what() << '\n';
    man.emit("convergence_trace.txt", e.trace());
    status = 3;
    label = "not_converged";
  } catch (const pvstat::ConvergenceError& e) {
    std::cerr << "pvstat: " << e.what() << '\n';
    status = 3;
    label = "not_converged";
  } catch (const pvstat::InvalidArgument& e) {
    std::cerr << "pvstat: " << e.what() << '\n';
    status = 2;
    label = "invalid_input";
  } catch (const std::exception& e) {
    std::cerr << "pvstat: " << e.what() << '\n';
    status = 1;
    label = "error";
  }
  try {
    const auto path = man.write(label);
    if (status == 0) std::cout << path.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "pvstat: cannot write manifest: " << e.what() << '\n';
    if (status == 0) status = 1;
  }
  return status;
}
