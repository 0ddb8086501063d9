#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "slip/config.hpp"
#include "slip/error.hpp"
#include "slip/format.hpp"
#include "slip/geometry.hpp"
#include "slip/objective.hpp"
#include "slip/slip.hpp"
#include "slip/subproblem.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw slip::ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw slip::ConfigError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <class F>
std::string render(F&& f) {
  std::ostringstream out;
  f(out);
  return out.str();
}

// json numbers through the shortest round-trip form, so output bytes do not depend on
// stream precision settings
ordered_json num(double x) { return ordered_json::parse(slip::format_double(x)); }

int run_solve(const std::string& config_path, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const slip::RunConfig cfg = slip::load_config(config_path);
  const slip::SlipConfig slip_cfg = cfg.slip();
  slip::validate(slip_cfg);
  if (!(cfg.alpha > 0)) throw slip::ConfigError("alpha must be positive for solve");
  const slip::Problem prob = slip::build_problem(cfg);
  const slip::ControlField v0 = slip::initial_control(cfg);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_atomic(dir / "config.cfg", slip::format_config(cfg));

  const fs::path log_path = dir / "iterations.jsonl";
  fs::path partial = log_path;
  partial += ".partial";
  std::ofstream log(partial, std::ios::binary);
  if (!log) throw slip::ConfigError("cannot write " + partial.string());

  auto write_control = [&](int k, const slip::ControlField& v) {
    char name[32];
    std::snprintf(name, sizeof name, "control_%04d.csv", k);
    write_atomic(dir / name, render([&](std::ostream& o) { slip::write_csv(o, v); }));
  };
  write_control(0, v0);

  slip::SlipObserver obs;
  obs.on_record = [&](const slip::IterationRecord& r) {
    log << slip::to_json(r) << '\n';
    log.flush();
  };
  obs.on_accept = [&](int outer, const slip::ControlField& v) { write_control(outer, v); };

  const slip::SlipTrace trace = slip::run(prob, v0, slip_cfg, obs);
  log.close();
  fs::rename(partial, log_path);

  const auto* tracking = dynamic_cast<const slip::TrackingTerm*>(prob.smooth.get());
  const slip::ScalarField y = tracking->state(trace.final_control.as_real());
  write_atomic(dir / "state_final.csv", render([&](std::ostream& o) { slip::write_csv(o, y); }));
  write_atomic(dir / "control_final.pgm", render([&](std::ostream& o) { slip::write_pgm(o, trace.final_control); }));

  int accepted = 0;
  for (const auto& r : trace.records) accepted += r.accepted ? 1 : 0;
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ordered_json summary;
  summary["termination"] = slip::to_string(trace.reason);
  summary["initial_j"] = num(slip::j_value(prob, v0));
  summary["final_j"] = num(trace.final_j);
  summary["final_f"] = num(trace.final_f);
  summary["final_tv"] = num(trace.final_tv);
  summary["records"] = trace.records.size();
  summary["accepted"] = accepted;
  summary["seed"] = cfg.seed;
  summary["timing"] = {{"wall_seconds", seconds}};
  write_atomic(dir / "summary.json", summary.dump(2) + "\n");

  std::cout << "termination " << slip::to_string(trace.reason) << "\nfinal_j " << slip::format_double(trace.final_j)
            << "\naccepted " << accepted << '\n';
  return kExitOk;
}

int run_subproblem(const std::string& instance_path, const std::string& solver, long node_limit,
                   const std::string& lp_path) {
  std::ifstream in(instance_path);
  if (!in) throw slip::ConfigError("cannot open " + instance_path);
  const slip::TRInstance inst = slip::read_instance(in);
  if (!lp_path.empty()) {
    write_atomic(lp_path, render([&](std::ostream& o) { slip::write_lp(o, slip::build_ip(inst)); }));
  }
  slip::IPSolution sol = solver == "exhaustive" ? slip::solve_exhaustive(inst)
                                                : slip::solve_bnb(inst, slip::BnbOptions{node_limit, 0});
  std::cout << "objective " << slip::format_double(sol.objective) << "\nstatus " << slip::to_string(sol.status)
            << "\nnodes " << sol.nodes << '\n';
  slip::write_csv(std::cout, sol.v_opt);
  return sol.status == slip::IPStatus::optimal ? kExitOk : kExitNumerical;
}

int run_stationarity(const std::string& control_path, const std::string& problem_path, double spacing) {
  const slip::RunConfig cfg = slip::load_config(problem_path);
  const slip::Problem prob = slip::build_problem(cfg);
  std::ifstream in(control_path);
  if (!in) throw slip::ConfigError("cannot open " + control_path);
  const slip::ControlField v = slip::read_csv(in, cfg.label_set());
  if (!(v.grid() == prob.control_grid())) throw slip::ConfigError("control grid does not match the problem");
  const slip::GradientField c = slip::gradient(prob, v);
  const auto dict = slip::interface_dictionary(v, spacing);
  const slip::StationarityReport rep = slip::stationarity_residual(v, slip::bilinear_density(c), prob.alpha, dict);

  ordered_json out;
  out["alpha"] = num(prob.alpha);
  out["fields"] = dict.size();
  out["max_normalized_residual"] = num(rep.max_normalized_residual);
  out["entries"] = ordered_json::array();
  for (const auto& e : rep.entries) {
    out["entries"].push_back({{"field", e.field},
                              {"lhs", num(e.lhs)},
                              {"rhs", num(e.rhs)},
                              {"residual", num(e.residual)},
                              {"normalization", num(e.normalization)}});
  }
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int run_verify_taylor(const std::string& fixture, int resolution) {
  const slip::VariationFixture fx = fixture == "disk" ? slip::disk_fixture() : slip::stripes_fixture();
  const auto rows = slip::verify_fixture(fx, resolution);
  bool ok = true;
  std::cout << std::left << std::setw(36) << "check" << std::setw(16) << "value" << std::setw(16) << "threshold"
            << "result\n";
  for (const auto& r : rows) {
    std::cout << std::setw(36) << r.check << std::setw(16) << slip::format_double(r.value) << std::setw(16)
              << slip::format_double(r.threshold) << (r.passed ? "PASS" : "FAIL") << '\n';
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitNumerical;
}

int run_check_gradient(const std::string& config_path, int grid, int samples) {
  slip::RunConfig cfg = slip::load_config(config_path);
  if (grid > 0) {
    cfg.grid_nx = grid;
    cfg.grid_ny = grid;
  }
  const slip::Problem prob = slip::build_problem(cfg);
  const int n = prob.control_grid().num_cells();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, cfg.labels.size() - 1);
  std::uniform_real_distribution<double> dir(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<double> w(static_cast<std::size_t>(n)), d(static_cast<std::size_t>(n));
    for (auto& x : w) x = cfg.labels[pick(rng)];
    for (auto& x : d) x = dir(rng);
    const slip::GradientCheck chk = slip::check_gradient(*prob.smooth, w, d);
    worst = std::max(worst, chk.best_relative_error);
  }
  std::cout << "max_relative_error " << slip::format_double(worst) << '\n';
  return worst <= 1e-6 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SLIP trust-region solver for TV-regularized integer control"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "run the trust-region loop on a configured problem");
  std::string config_path, out_dir = "run";
  solve->add_option("--config", config_path)->required();
  solve->add_option("--out", out_dir);

  auto* sub = app.add_subcommand("subproblem", "solve one trust-region subproblem instance");
  std::string instance_path, solver = "bnb", lp_path;
  long node_limit = 100000;
  sub->add_option("--instance", instance_path)->required();
  sub->add_option("--solver", solver)->check(CLI::IsMember({"bnb", "exhaustive"}));
  sub->add_option("--node-limit", node_limit)->check(CLI::PositiveNumber);
  sub->add_option("--lp", lp_path, "also write the integer program in LP format");

  auto* stat = app.add_subcommand("stationarity", "stationarity residual of a control");
  std::string control_path, problem_path;
  double spacing = 0.125;
  stat->add_option("--control", control_path)->required();
  stat->add_option("--problem", problem_path)->required();
  stat->add_option("--spacing", spacing)->check(CLI::PositiveNumber);

  auto* taylor = app.add_subcommand("verify-taylor", "local-variation checks on a closed-form fixture");
  std::string fixture;
  int resolution = 512;
  taylor->add_option("--fixture", fixture)->required()->check(CLI::IsMember({"disk", "stripes"}));
  taylor->add_option("--resolution", resolution)->check(CLI::Range(16, 8192));

  auto* grad = app.add_subcommand("check-gradient", "finite-difference check of the reduced gradient");
  std::string grad_config;
  int grid = 0, samples = 20;
  grad->add_option("--config", grad_config)->required();
  grad->add_option("--grid", grid)->check(CLI::PositiveNumber);
  grad->add_option("--samples", samples)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*solve) return run_solve(config_path, out_dir);
    if (*sub) return run_subproblem(instance_path, solver, node_limit, lp_path);
    if (*stat) return run_stationarity(control_path, problem_path, spacing);
    if (*taylor) return run_verify_taylor(fixture, resolution);
    if (*grad) return run_check_gradient(grad_config, grid, samples);
  } catch (const slip::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const slip::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const slip::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
