// Command-line front end: plan, rollout, tune, grid, report.

#include "robust_gait/config.hpp"
#include "robust_gait/errors.hpp"
#include "robust_gait/harness.hpp"
#include "robust_gait/plant.hpp"
#include "robust_gait/qp_solver.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace rg = robust_gait;

namespace
{

enum ExitCode
{
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kNumerical = 3
};

struct Common
{
  std::string config_path;
  std::string scenario = "a";
  std::string out;
  int budget = -1;
  long long seed = -1;
  double beta = 1000.0;
  double gamma = 1000.0;
  int grid_n = 21;
};

rg::harness::ExperimentConfig load(const Common & c)
{
  rg::harness::ExperimentConfig cfg =
      c.config_path.empty() ? rg::harness::default_config() : rg::harness::parse_config(c.config_path);
  if(!c.out.empty()) cfg.output_dir = c.out;
  if(c.budget >= 0) cfg.tuner.budget = c.budget;
  if(c.seed >= 0) cfg.tuner.seed = static_cast<std::uint64_t>(c.seed);
  cfg.validate();
  return cfg;
}

std::vector<char> labels_of(const std::string & s)
{
  if(s == "all") return {'a', 'b', 'c', 'd'};
  if(s.size() == 1 && s[0] >= 'a' && s[0] <= 'd') return {s[0]};
  throw rg::harness::ConfigError("--scenario must be one of a, b, c, d, all");
}

std::filesystem::path out_dir(const rg::harness::ExperimentConfig & cfg)
{
  std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_plan(const Common & c)
{
  const auto cfg = load(c);
  const rg::qp::Weights w{1.0, c.beta, c.gamma};
  w.validate();
  const auto support = rg::plant::initial_support(cfg.sim);
  const auto init = rg::plant::initial_state(cfg.sim);
  const rg::qp::QpProblem problem = rg::plant::replan_problem(w, init, support, 0, cfg.sim);
  const rg::qp::QpSolution sol = rg::qp::solve_qp(problem);
  std::printf("status=%s iterations=%d objective=%.10g kkt=%.3g primal=%.3g\n", rg::qp::to_string(sol.status).c_str(),
              sol.iterations, sol.objective, sol.kkt_residual, sol.primal_residual);
  const rg::qp::GaitPlan plan = rg::qp::extract_plan(sol, problem, init, cfg.sim.params);

  const auto path = (out_dir(cfg) / "plan.csv").string();
  std::ofstream f(path);
  if(!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << "k,jerk_x,jerk_y,cx,cy,zx,zy,rcof\n";
  char line[512];
  for(Eigen::Index k = 0; k < plan.jerks.rows(); ++k)
  {
    std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long>(k),
                  plan.jerks(k, 0), plan.jerks(k, 1), plan.predicted_com[static_cast<std::size_t>(k)].pos.x(),
                  plan.predicted_com[static_cast<std::size_t>(k)].pos.y(),
                  plan.predicted_zmp(k, 0), plan.predicted_zmp(k, 1), plan.predicted_rcof[k]);
    f << line;
  }
  for(Eigen::Index s = 0; s < plan.footsteps.rows(); ++s)
    std::printf("footstep %ld: (%.6f, %.6f)\n", static_cast<long>(s), plan.footsteps(s, 0), plan.footsteps(s, 1));
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_rollout(const Common & c)
{
  const auto cfg = load(c);
  for(char label : labels_of(c.scenario))
  {
    const Eigen::Vector2d delta(c.beta, c.gamma);
    const rg::plant::RolloutResult r = rg::harness::rollout_at(cfg, label, delta);
    const double J = rg::harness::make_objective(cfg, label)(delta).J;
    const auto path = (out_dir(cfg) / ("trajectory_" + std::string(1, label) + ".csv")).string();
    rg::plant::write_trajectory_csv(r, path);
    std::printf("scenario %c: J=%.10g fell=%d slip=%.6g qp_solves=%d -> %s\n", label, J, r.fell ? 1 : 0, r.slip_accum,
                r.qp_solves, path.c_str());
  }
  return kOk;
}

int cmd_tune(const Common & c)
{
  const auto cfg = load(c);
  for(char label : labels_of(c.scenario))
  {
    const rg::harness::RunReport report = rg::harness::run_scenario(label, cfg);
    const auto & h = report.history;
    std::printf("scenario %c: best (beta, gamma) = (%.6g, %.6g) J=%.10g after %zu calls, %.1f s\n", label,
                h.best_delta[0], h.best_delta[1], h.best_J, h.samples.size(), report.wall_seconds);
    for(const auto & a : report.artifacts) std::printf("  %s\n", (std::filesystem::path(cfg.output_dir) / a).c_str());
  }
  return kOk;
}

int cmd_grid(const Common & c)
{
  const auto cfg = load(c);
  for(char label : labels_of(c.scenario))
  {
    const rg::harness::GridResult g = rg::harness::grid_search(label, cfg, c.grid_n);
    const auto path = (out_dir(cfg) / ("grid_" + std::string(1, label) + ".csv")).string();
    rg::harness::write_grid_csv(g, path);
    std::printf("scenario %c: grid %dx%d best (beta, gamma) = (%.6g, %.6g) J=%.10g -> %s\n", label, c.grid_n, c.grid_n,
                g.best_delta[0], g.best_delta[1], g.best_J, path.c_str());
  }
  return kOk;
}

int cmd_report(const Common & c)
{
  const auto cfg = load(c);
  for(char label : labels_of(c.scenario))
  {
    const auto dir = std::filesystem::path(cfg.output_dir);
    const auto history = rg::harness::read_history_csv((dir / ("history_" + std::string(1, label) + ".csv")).string());
    const auto path = (out_dir(cfg) / ("plot_" + std::string(1, label) + ".csv")).string();
    rg::harness::emit_plot_data(history, path);
    std::printf("scenario %c: %zu calls, min J %.10g -> %s\n", label, history.samples.size(), history.best_J,
                path.c_str());
  }
  return kOk;
}

} // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Bayesian tuning of MPC walking cost weights on a LIP surrogate"};
  app.require_subcommand(1);
  Common c;

  auto add_common = [&c](CLI::App * sub) {
    sub->add_option("--config", c.config_path, "key=value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (overrides output_dir)");
  };
  auto add_weights = [&c](CLI::App * sub) {
    sub->add_option("--beta", c.beta, "ZMP tracking weight")->check(CLI::Range(0.0, 1000.0));
    sub->add_option("--gamma", c.gamma, "RCoF weight")->check(CLI::Range(0.0, 1000.0));
  };
  auto add_scenario = [&c](CLI::App * sub) {
    sub->add_option("--scenario", c.scenario, "a, b, c, d or all")->check(CLI::IsMember({"a", "b", "c", "d", "all"}));
  };

  CLI::App * plan = app.add_subcommand("plan", "solve the first walking QP and dump the plan");
  add_common(plan);
  add_weights(plan);
  CLI::App * rollout = app.add_subcommand("rollout", "simulate one scenario at fixed weights");
  add_common(rollout);
  add_weights(rollout);
  add_scenario(rollout);
  CLI::App * tune = app.add_subcommand("tune", "Bayesian optimization of (beta, gamma)");
  add_common(tune);
  add_scenario(tune);
  tune->add_option("--budget", c.budget, "objective calls")->check(CLI::PositiveNumber);
  tune->add_option("--seed", c.seed, "tuner seed")->check(CLI::NonNegativeNumber);
  CLI::App * grid = app.add_subcommand("grid", "exhaustive grid over the weight bounds");
  add_common(grid);
  add_scenario(grid);
  grid->add_option("--grid-n", c.grid_n, "points per axis")->check(CLI::Range(2, 1000));
  CLI::App * report = app.add_subcommand("report", "emit plot data from a history file");
  add_common(report);
  add_scenario(report);

  try
  {
    app.parse(argc, argv);
  }
  catch(const CLI::ParseError & e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try
  {
    if(*plan) return cmd_plan(c);
    if(*rollout) return cmd_rollout(c);
    if(*tune) return cmd_tune(c);
    if(*grid) return cmd_grid(c);
    if(*report) return cmd_report(c);
  }
  catch(const rg::NumericalFailure & e)
  {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  catch(const rg::InvalidParameter & e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch(const std::exception & e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
