// Command-line front end: barrier solving, increment sampling, embedding
// verification and the random walk over Root barriers.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rootbarrier/rootbarrier.hpp"

namespace rb = rootbarrier;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rb::ConfigError("cannot open output file '" + path + "'");
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rb::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw rb::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

json run_metadata(const std::string& command, std::optional<std::uint64_t> seed, json config) {
  json meta = {{"tool", "rootbarrier"}, {"version", rb::kVersion}, {"command", command}, {"config", std::move(config)}};
  meta["seed"] = seed ? json(*seed) : json(nullptr);
  return meta;
}

// "a:b:n" -> n equally spaced values from a to b
std::vector<double> parse_range(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  try {
    if (parts.size() == 3) {
      const double a = std::stod(parts[0]);
      const double b = std::stod(parts[1]);
      const int n = std::stoi(parts[2]);
      if (n < 1) throw rb::ConfigError("--deltas: count must be >= 1");
      std::vector<double> out;
      for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
      return out;
    }
    std::vector<double> out;
    std::stringstream list(spec);
    for (std::string item; std::getline(list, item, ',');) out.push_back(std::stod(item));
    if (out.empty()) throw rb::ConfigError("--deltas: empty list");
    return out;
  } catch (const std::logic_error&) {
    throw rb::ConfigError("--deltas: expected 'start:stop:count' or a comma list, got '" + spec + "'");
  }
}

struct SolveBarrierArgs {
  std::string family = "power";
  double k = 1.0;
  double alpha = 1.0;
  std::string measure_file;
  std::size_t n = 500;
  double tol = 1e-12;
  std::string out;
};

int run_solve_barrier(const SolveBarrierArgs& a) {
  json measure_spec;
  if (!a.measure_file.empty()) {
    measure_spec = read_json_file(a.measure_file);
  } else if (a.family == "power") {
    measure_spec = {{"family", "power"}, {"k", a.k}, {"alpha", a.alpha}};
  } else {
    throw rb::ConfigError("--family table requires --measure FILE with the density samples");
  }
  const rb::SymmetricMeasure mu = rb::measure_from_json(measure_spec);
  const auto start = std::chrono::steady_clock::now();
  const rb::BarrierTable table = rb::solve_barrier(mu, a.n, a.tol);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json meta = rb::barrier_metadata(table);
  const json run = run_metadata("solve-barrier", std::nullopt,
                                {{"measure", measure_spec}, {"n", a.n}, {"tol", a.tol}, {"out", a.out}});
  meta.update(run);
  auto out = open_output(a.out);
  rb::write_barrier_csv(out, table, meta);
  std::cerr << "r(0) = " << rb::format_double(table.r0()) << ", n = " << table.n() << ", solved in " << seconds
            << " s";
  if (const std::size_t e = table.meta().extrapolated_nodes; e > 0) {
    std::cerr << " (" << e << " node" << (e > 1 ? "s" : "") << " near x = 0 continued as A - B x^2)";
  }
  std::cerr << "\n";
  return 0;
}

struct SampleArgs {
  std::string barrier;
  double eps = 1.0;
  std::size_t n = 100000;
  std::uint64_t seed = 42;
  std::uint64_t stream = 0;
  std::string out;
};

int run_sample(const SampleArgs& a) {
  const rb::BarrierTable table = rb::load_barrier(a.barrier);
  rb::require_unit_uniform_table(table);
  if (!(a.eps > 0.0)) throw rb::ConfigError("--eps must be positive");
  rb::RngStream stream(a.seed, a.stream);
  auto out = open_output(a.out);
  out << "# "
      << run_metadata("sample", a.seed,
                      {{"barrier", a.barrier}, {"eps", a.eps}, {"n", a.n}, {"stream", a.stream}, {"out", a.out}})
             .dump()
      << "\n";
  out << "k,dt,dx,u\n";
  for (std::size_t k = 0; k < a.n; ++k) {
    const rb::IncrementSample s = rb::sample_increment(table, a.eps, stream);
    out << k << "," << rb::format_double(s.dt) << "," << rb::format_double(s.dx) << "," << rb::format_double(s.u)
        << "\n";
  }
  return 0;
}

struct VerifyArgs {
  std::string barrier;
  std::size_t paths = 100000;
  double dt = 1e-5;
  std::uint64_t seed = 7;
  std::size_t levels = 3;
  std::size_t workers = 1;
  bool obstacle = false;
  std::size_t grid = 50;
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  const rb::BarrierTable table = rb::load_barrier(a.barrier);
  const rb::EmbeddingTestReport r =
      rb::ks_embedding_test(table, a.paths, a.dt, rb::RngStream(a.seed, 0), a.workers, a.levels);
  json levels = json::array();
  for (const auto& l : r.refinement) {
    levels.push_back({{"dt_grid", l.dt_grid},
                      {"ks_statistic", l.ks_statistic},
                      {"mean_tau", l.mean_tau},
                      {"tau_std_error", l.tau_std_error},
                      {"mean_hit_gap", l.mean_hit_gap},
                      {"mean_steps", l.mean_steps}});
  }
  json report = {{"n_paths", r.n_paths},
                 {"dt_grid", r.dt_grid},
                 {"ks_statistic", r.ks_statistic},
                 {"ks_threshold", r.ks_threshold},
                 {"ks_passed", r.ks_passed()},
                 {"mean_tau", r.mean_tau},
                 {"tau_std_error", r.tau_std_error},
                 {"mean_tau_sq", r.mean_tau_sq},
                 {"max_tau", r.max_tau},
                 {"wald_target", r.wald_target},
                 {"wald_bias_estimate", r.wald_bias_estimate},
                 {"wald_passed", r.wald_passed()},
                 {"bias_decreasing", r.bias_decreasing},
                 {"max_excursion", r.max_excursion},
                 {"hit_gap_max", r.hit_gap_max},
                 {"hit_gap_bound", r.hit_gap_bound},
                 {"hit_gap_passed", r.hit_gap_passed()},
                 {"refinement", levels}};
  if (a.obstacle) {
    const auto& m = table.meta().measure;
    const rb::SymmetricMeasure mu =
        m.is_object() ? rb::measure_from_json(m) : rb::make_power_measure(table.k(), 1.0);
    std::vector<double> ts, xs, contact;
    for (std::size_t i = 0; i < a.grid; ++i) {
      ts.push_back(1.25 * table.r0() * static_cast<double>(i) / static_cast<double>(a.grid - 1));
      xs.push_back(-1.5 * table.k() + 3.0 * table.k() * static_cast<double>(i) / static_cast<double>(a.grid - 1));
    }
    for (int i = 0; i < 20; ++i) contact.push_back(table.k() * i / 20.0);
    const rb::ObstacleReport o = rb::obstacle_check(table, mu, ts, xs, contact);
    report["obstacle"] = {{"max_obstacle_violation", o.max_obstacle_violation},
                          {"max_contact_gap", o.max_contact_gap},
                          {"max_initial_gap", o.max_initial_gap},
                          {"quadrature_change", o.quadrature_change},
                          {"grid_points", o.grid_points},
                          {"contact_nodes", o.contact_nodes}};
  }
  report["meta"] = run_metadata("verify-embedding", a.seed,
                                {{"barrier", a.barrier},
                                 {"paths", a.paths},
                                 {"dt", a.dt},
                                 {"levels", a.levels},
                                 {"workers", a.workers},
                                 {"obstacle", a.obstacle},
                                 {"grid", a.grid},
                                 {"out", a.out}});
  auto out = open_output(a.out);
  out << report.dump(2) << "\n";
  std::cerr << "KS " << r.ks_statistic << " (threshold " << r.ks_threshold << "), E[tau] " << r.mean_tau << "\n";
  return 0;
}

struct PdeArgs {
  std::string config;
  std::string barrier;
  double t0 = 0.0;
  double x0 = 1.0;
  double delta = 0.005;
  std::string deltas = "0.001:0.01:10";
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::string out;
};

json pde_config(const PdeArgs& a, const json& problem) {
  return {{"config", a.config}, {"problem", problem}, {"barrier", a.barrier}, {"t0", a.t0},
          {"x0", a.x0},         {"samples", a.samples}, {"workers", a.workers}, {"out", a.out}};
}

int run_solve_pde(const PdeArgs& a) {
  const json problem = read_json_file(a.config);
  const rb::ParabolicDomain dom = rb::domain_from_json(problem);
  const rb::BarrierTable table = rb::load_barrier(a.barrier);
  const rb::WalkStats s = rb::solve_pde(dom, table, a.t0, a.x0, a.delta, a.samples, rb::RngStream(a.seed, 0), a.workers);
  json cfg = pde_config(a, problem);
  cfg["delta"] = a.delta;
  const json report = {{"estimate", s.estimate},     {"std_error", s.std_error}, {"mean_steps", s.mean_steps},
                       {"samples", s.samples},       {"delta", s.delta},
                       {"meta", run_metadata("solve-pde", a.seed, cfg)}};
  auto out = open_output(a.out);
  out << report.dump(2) << "\n";
  std::cerr << "u(" << a.t0 << ", " << a.x0 << ") ~ " << s.estimate << " +- " << s.std_error << "\n";
  return 0;
}

int run_sweep_delta(const PdeArgs& a) {
  const json problem = read_json_file(a.config);
  const rb::ParabolicDomain dom = rb::domain_from_json(problem);
  const rb::BarrierTable table = rb::load_barrier(a.barrier);
  const std::vector<double> deltas = parse_range(a.deltas);
  json cfg = pde_config(a, problem);
  cfg["deltas"] = a.deltas;
  auto out = open_output(a.out);
  out << "# " << run_metadata("sweep-delta", a.seed, cfg).dump() << "\n";
  out << "delta,estimate,std_error,mean_steps\n";
  for (double delta : deltas) {
    const rb::WalkStats s = rb::solve_pde(dom, table, a.t0, a.x0, delta, a.samples, rb::RngStream(a.seed, 0), a.workers);
    out << rb::format_double(delta) << "," << rb::format_double(s.estimate) << "," << rb::format_double(s.std_error)
        << "," << rb::format_double(s.mean_steps) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Root barrier solver, Brownian increment sampler and random walk over Root barriers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rb::kVersion);

  SolveBarrierArgs sb;
  auto* solve = app.add_subcommand("solve-barrier", "Solve the integral equation for the barrier function r");
  solve->add_option("--family", sb.family, "Measure family")->check(CLI::IsMember({"power", "table"}));
  solve->add_option("--k", sb.k, "Support half-width");
  solve->add_option("--alpha", sb.alpha, "Power-family exponent (>= 1)");
  solve->add_option("--measure", sb.measure_file, "JSON measure spec (overrides --family/--k/--alpha)");
  solve->add_option("--n", sb.n, "Grid resolution");
  solve->add_option("--tol", sb.tol, "Bisection tolerance");
  solve->add_option("--out", sb.out, "Output CSV")->required();

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Sample Brownian time-space increments from a U[-1,1] barrier");
  sample->add_option("--barrier", sa.barrier, "Barrier CSV")->required();
  sample->add_option("--eps", sa.eps, "Spatial scale");
  sample->add_option("--n", sa.n, "Number of increments");
  sample->add_option("--seed", sa.seed, "RNG seed");
  sample->add_option("--stream", sa.stream, "RNG stream id");
  sample->add_option("--out", sa.out, "Output CSV")->required();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify-embedding", "Check that the barrier embeds its target law");
  verify->add_option("--barrier", va.barrier, "Barrier CSV")->required();
  verify->add_option("--paths", va.paths, "Number of simulated paths");
  verify->add_option("--dt", va.dt, "Finest path grid step");
  verify->add_option("--seed", va.seed, "RNG seed");
  verify->add_option("--levels", va.levels, "Grid levels (dt, 2dt, 4dt, ...)");
  verify->add_option("--workers", va.workers, "Worker threads");
  verify->add_flag("--obstacle", va.obstacle, "Also run the obstacle-problem check");
  verify->add_option("--grid", va.grid, "Obstacle check grid size per axis");
  verify->add_option("--out", va.out, "Output JSON report")->required();

  PdeArgs pa;
  auto* pde = app.add_subcommand("solve-pde", "Random walk over Root barriers for the heat equation");
  pde->add_option("--config", pa.config, "Problem JSON")->required();
  pde->add_option("--barrier", pa.barrier, "Barrier CSV for U[-1,1]")->required();
  pde->add_option("--t0", pa.t0, "Start time");
  pde->add_option("--x0", pa.x0, "Start position");
  pde->add_option("--delta", pa.delta, "Stopping shell thickness");
  pde->add_option("--samples", pa.samples, "Number of chains");
  pde->add_option("--seed", pa.seed, "RNG seed");
  pde->add_option("--workers", pa.workers, "Worker threads");
  pde->add_option("--out", pa.out, "Output JSON")->required();

  PdeArgs sw;
  auto* sweep = app.add_subcommand("sweep-delta", "solve-pde over a range of delta, as CSV");
  sweep->add_option("--config", sw.config, "Problem JSON")->required();
  sweep->add_option("--barrier", sw.barrier, "Barrier CSV for U[-1,1]")->required();
  sweep->add_option("--t0", sw.t0, "Start time");
  sweep->add_option("--x0", sw.x0, "Start position");
  sweep->add_option("--deltas", sw.deltas, "start:stop:count or comma list");
  sweep->add_option("--samples", sw.samples, "Number of chains per delta");
  sweep->add_option("--seed", sw.seed, "RNG seed");
  sweep->add_option("--workers", sw.workers, "Worker threads");
  sweep->add_option("--out", sw.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*solve) return run_solve_barrier(sb);
    if (*sample) return run_sample(sa);
    if (*verify) return run_verify(va);
    if (*pde) return run_solve_pde(pa);
    if (*sweep) return run_sweep_delta(sw);
  } catch (const rb::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const rb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
