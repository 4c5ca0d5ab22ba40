// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "robust_gait/bo.hpp"
#include "robust_gait/gait_qp.hpp"
#include "robust_gait/gp.hpp"
#include "robust_gait/harness.hpp"
#include "robust_gait/lipm.hpp"
#include "robust_gait/random.hpp"

#include "gait_instances.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

using namespace robust_gait;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace
{

struct Verdict
{
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char * f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict a1_certification()
{
  const auto t0 = Clock::now();
  RandomStream rng(101);
  int failures = 0;
  int compared = 0;
  double worst_kkt = 0.0, worst_primal = 0.0, worst_gap = 0.0;
  for(int inst = 0; inst < 500; ++inst)
  {
    const auto g = test_support::random_gait_instance(rng);
    const qp::Weights w = test_support::random_weights(rng);
    const qp::QpProblem p = test_support::build(g, w);
    const qp::QpSolution s = qp::solve_qp(p);
    if(s.status != qp::QpStatus::optimal)
    {
      ++failures;
      continue;
    }
    worst_kkt = std::max(worst_kkt, s.kkt_residual);
    worst_primal = std::max(worst_primal, s.primal_residual);
    bool ok = s.kkt_residual <= 1e-6 && s.primal_residual <= 1e-8;
    for(const Eigen::VectorXd & y : test_support::random_feasible_points(p, s.x, 100, rng))
    {
      if(test_support::max_violation(p, y) > 1e-8) continue;
      ++compared;
      // rounding slack of the objective evaluation only
      const double fy = p.objective(y);
      const double gap = s.objective - fy;
      worst_gap = std::max(worst_gap, gap / (1.0 + std::abs(fy)));
      if(gap > 1e-12 * (1.0 + std::abs(fy))) ok = false;
    }
    if(!ok) ++failures;
  }
  const double t = seconds_since(t0);
  Verdict v;
  v.pass = failures == 0 && compared >= 500 * 90 && t < 60.0;
  v.detail = fmt("500 instances, %d failing, max kkt %.2e, max infeas %.2e, %d feasible comparisons, worst rel gap %.2e, %.1f s",
                 failures, worst_kkt, worst_primal, compared, worst_gap, t);
  return v;
}

Verdict a2_monotonicity()
{
  RandomStream rng(202);
  const std::vector<double> grid = {0.0, 200.0, 400.0, 600.0, 800.0, 1000.0};
  int violations = 0;
  double worst = 0.0;
  for(int inst = 0; inst < 20; ++inst)
  {
    const auto g = test_support::random_gait_instance(rng);
    const double grav = g.config.params.gravity;
    Eigen::MatrixXd zmp(6, 6), rcof(6, 6);
    for(int i = 0; i < 6; ++i)
      for(int j = 0; j < 6; ++j)
      {
        const qp::QpProblem p = test_support::build(g, {1.0, grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]});
        const qp::QpSolution s = qp::solve_qp(p);
        if(s.status != qp::QpStatus::optimal) return {false, fmt("instance %d not solved", inst)};
        const qp::CostTerms c = qp::cost_terms(p, s.x, grav);
        zmp(i, j) = c.zmp;
        rcof(i, j) = c.rcof;
      }
    auto check = [&](double later, double earlier) {
      const double excess = (later - earlier) / std::max(1.0, std::abs(earlier));
      worst = std::max(worst, excess);
      if(excess > 1e-8) ++violations;
    };
    for(int i = 0; i < 6; ++i)
      for(int j = 0; j + 1 < 6; ++j)
      {
        check(rcof(i, j + 1), rcof(i, j)); // rising gamma
        check(zmp(j + 1, i), zmp(j, i)); // rising beta
      }
  }
  return {violations == 0, fmt("20 instances x 36 weights, %d violations, worst relative increase %.2e", violations, worst)};
}

struct ScenarioRun
{
  harness::RunReport report;
  harness::GridResult grid;
};

Verdict a3_oracle(const std::map<char, ScenarioRun> & runs)
{
  Verdict v;
  for(const auto & [label, r] : runs)
  {
    const double bo_best = r.report.history.min_so_far.at(49);
    const double ratio = bo_best / r.grid.best_J;
    const bool ok = bo_best <= 1.10 * r.grid.best_J;
    v.pass = v.pass && ok;
    v.detail += fmt("(%c) bo %.4f grid %.4f ratio %.3f%s; ", label, bo_best, r.grid.best_J, ratio, ok ? "" : " FAIL");
  }
  return v;
}

Verdict a4_settling(const std::map<char, ScenarioRun> & runs)
{
  Verdict v;
  for(const auto & [label, r] : runs)
  {
    const auto & m = r.report.history.min_so_far;
    const double total = m.at(0) - m.at(49);
    const double late = m.at(29) - m.at(49);
    const bool ok = total > 0.0 ? late < 0.05 * total : late == 0.0;
    v.pass = v.pass && ok;
    v.detail += fmt("(%c) late %.4g of total %.4g%s; ", label, late, total, ok ? "" : " FAIL");
  }
  return v;
}

Verdict a5_fall_signature(const std::map<char, ScenarioRun> & runs)
{
  Verdict v;
  for(char label : {'b', 'c', 'd'})
  {
    const auto & samples = runs.at(label).report.history.samples;
    std::vector<double> standing;
    double worst_fall = -1.0;
    int falls = 0;
    for(const auto & s : samples)
    {
      if(s.fell)
      {
        ++falls;
        worst_fall = std::max(worst_fall, s.J);
      }
      else
        standing.push_back(s.J);
    }
    double median = 0.0;
    if(!standing.empty())
    {
      std::sort(standing.begin(), standing.end());
      const std::size_t h = standing.size() / 2;
      median = standing.size() % 2 ? standing[h] : 0.5 * (standing[h - 1] + standing[h]);
    }
    const bool ok = falls > 0 && !standing.empty() && worst_fall >= 10.0 * median;
    v.pass = v.pass && ok;
    v.detail += fmt("(%c) %d falls, max fall J %.3g, standing median %.3g%s; ", label, falls, worst_fall, median,
                    ok ? "" : " FAIL");
  }
  return v;
}

Verdict a6_micro_checks()
{
  const auto t0 = Clock::now();
  RandomStream rng(606);
  double lml_err = 0.0, ei_err = 0.0, post_err = 0.0, lip_err = 0.0;

  auto inputs = [&rng](int n) {
    std::vector<Eigen::Vector2d> x;
    for(int i = 0; i < n; ++i) x.emplace_back(rng.uniform(), rng.uniform());
    return x;
  };
  auto targets = [&rng](int n) {
    Eigen::VectorXd y(n);
    for(int i = 0; i < n; ++i) y[i] = rng.uniform(-1.0, 2.0);
    return y;
  };
  auto kernel = [&rng]() {
    bo::Kernel k;
    k.signal_var = rng.uniform(0.2, 3.0);
    k.lengthscales = {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
    k.noise_var = rng.uniform(1e-4, 1e-1);
    return k;
  };

  for(int trial = 0; trial < 20; ++trial)
  {
    const auto x = inputs(6);
    const Eigen::VectorXd y = targets(6);
    const bo::Kernel k = kernel();
    const bo::LogLikelihood ll = bo::log_marginal_likelihood(bo::gp_condition(x, y, k));
    const Eigen::Vector4d theta = k.log_params();
    const double h = 1e-5;
    for(int i = 0; i < 4; ++i)
    {
      Eigen::Vector4d up = theta, down = theta;
      up[i] += h;
      down[i] -= h;
      const double fd = (bo::log_marginal_likelihood(bo::gp_condition(x, y, bo::Kernel::from_log_params(up))).value
                         - bo::log_marginal_likelihood(bo::gp_condition(x, y, bo::Kernel::from_log_params(down))).value)
                        / (2 * h);
      lml_err = std::max(lml_err, std::abs(fd - ll.gradient[i]) / std::max(1.0, std::abs(fd)));
    }
  }

  for(int trial = 0; trial < 10; ++trial)
  {
    const auto x = inputs(6);
    const Eigen::VectorXd y = targets(6);
    const bo::GpModel m = bo::gp_fit(x, y);
    const Eigen::Vector2d at(rng.uniform(), rng.uniform());
    const double best = m.targets.minCoeff();
    const bo::Posterior p = bo::gp_posterior(m, at);
    const double s = std::sqrt(p.var);
    double sum = 0.0;
    const int draws = 1000000;
    for(int i = 0; i < draws / 2; ++i)
    {
      const double z = rng.normal();
      sum += std::max(best - (p.mean + s * z), 0.0) + std::max(best - (p.mean - s * z), 0.0);
    }
    ei_err = std::max(ei_err, std::abs(sum / draws - bo::expected_improvement(m, at, best)));
  }

  for(int trial = 0; trial < 10; ++trial)
  {
    const auto x = inputs(5);
    const Eigen::VectorXd y = targets(5);
    const bo::Kernel k = kernel();
    const bo::GpModel m = bo::gp_condition(x, y, k);
    const Eigen::MatrixXd Kn = test_support::dense_cov(x, k) + k.noise_var * Eigen::MatrixXd::Identity(5, 5);
    const auto lu = Kn.fullPivLu();
    const Eigen::VectorXd w = lu.solve(Eigen::VectorXd(y.array() - y.mean()));
    for(int q = 0; q < 50; ++q)
    {
      const Eigen::Vector2d xs(rng.uniform(), rng.uniform());
      Eigen::VectorXd ks(5);
      for(int i = 0; i < 5; ++i) ks[i] = test_support::se_cov(x[static_cast<std::size_t>(i)], xs, k);
      const double mean = y.mean() + ks.dot(w);
      const double var = std::max(0.0, k.signal_var - ks.dot(lu.solve(ks)));
      const bo::Posterior p = bo::gp_posterior(m, xs);
      post_err = std::max({post_err, std::abs(p.mean - mean), std::abs(p.var - var)});
    }
  }

  const lipm::LipParams params;
  for(int trial = 0; trial < 200; ++trial)
  {
    const double dt = rng.uniform(0.01, 0.5);
    lipm::LipState s;
    for(int a = 0; a < 2; ++a)
    {
      s.pos[a] = rng.uniform(-1.0, 1.0);
      s.vel[a] = rng.uniform(-1.0, 1.0);
      s.acc[a] = rng.uniform(-3.0, 3.0);
    }
    const Eigen::Vector2d jerk(rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0));
    const lipm::LipState next = lipm::step_state(s, jerk, lipm::discretize(params, dt));
    for(int a = 0; a < 2; ++a)
    {
      const Eigen::Vector3d ref = test_support::rk4_axis(s.axis(a), jerk[a], dt, 1000);
      lip_err = std::max(lip_err, (next.axis(a) - ref).cwiseAbs().maxCoeff());
    }
  }

  const double t = seconds_since(t0);
  Verdict v;
  v.pass = lml_err <= 1e-4 && ei_err <= 1e-3 && post_err <= 1e-8 && lip_err <= 1e-10 && t < 120.0;
  v.detail = fmt("lml grad rel %.2e, EI vs MC %.2e, posterior %.2e, LIP vs RK4 %.2e, %.1f s", lml_err, ei_err, post_err,
                 lip_err, t);
  return v;
}

Verdict a7_determinism(const std::map<char, ScenarioRun> & runs, const harness::ExperimentConfig & base)
{
  Verdict v;
  for(const auto & [label, r] : runs)
  {
    harness::ExperimentConfig c = base;
    const fs::path again = fs::path(base.output_dir) / "rerun";
    fs::create_directories(again);
    c.output_dir = again.string();
    harness::run_scenario(label, c);
    const std::string name = std::string("history_") + label + ".csv";
    const bool same = slurp(fs::path(base.output_dir) / name) == slurp(again / name);
    v.pass = v.pass && same;
    v.detail += fmt("(%c) %s; ", label, same ? "identical" : "DIFFERENT");
  }
  return v;
}

Verdict a8_structure(const std::map<char, ScenarioRun> & runs, const harness::ExperimentConfig & base)
{
  Verdict v;
  for(const auto & [label, r] : runs)
  {
    const auto & h = r.report.history;
    bool ok = !h.samples.empty() && h.samples.front().delta == Eigen::Vector2d(1000.0, 1000.0);
    const fs::path plot = fs::path(base.output_dir) / (std::string("plot_") + label + ".csv");
    harness::emit_plot_data(h, plot.string());
    const harness::PlotData d = harness::parse_plot_data(plot.string());
    ok = ok && d.min_so_far.size() == h.samples.size();
    for(std::size_t k = 1; k < d.min_so_far.size(); ++k) ok = ok && d.min_so_far[k] <= d.min_so_far[k - 1];
    v.pass = v.pass && ok;
    v.detail += fmt("(%c) %s; ", label, ok ? "ok" : "BROKEN");
  }
  return v;
}

void print(const char * id, const Verdict & v)
{
  std::printf("%s %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
}

} // namespace

int main(int argc, char ** argv)
{
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "robust_gait_acceptance";
  fs::remove_all(out);
  fs::create_directories(out);

  bool all = true;
  auto report = [&all](const char * id, const Verdict & v) {
    print(id, v);
    all = all && v.pass;
  };

  report("A1", a1_certification());
  report("A2", a2_monotonicity());

  harness::ExperimentConfig config = harness::default_config();
  config.output_dir = out.string();
  std::map<char, ScenarioRun> runs;
  const auto t0 = Clock::now();
  for(char label : {'a', 'b', 'c', 'd'})
  {
    ScenarioRun r;
    r.report = harness::run_scenario(label, config);
    r.grid = harness::grid_search(label, config, 21);
    harness::write_grid_csv(r.grid, (out / (std::string("grid_") + label + ".csv")).string());
    runs.emplace(label, std::move(r));
  }
  std::printf("scenarios tuned and gridded in %.1f s\n", seconds_since(t0));

  report("A3", a3_oracle(runs));
  report("A4", a4_settling(runs));
  report("A5", a5_fall_signature(runs));
  report("A6", a6_micro_checks());
  report("A7", a7_determinism(runs, config));
  report("A8", a8_structure(runs, config));
  return all ? 0 : 1;
}
