// Serial vs OpenMP timings for the tuner's data-parallel kernels.

#include "robust_gait/bo.hpp"
#include "robust_gait/harness.hpp"
#include "robust_gait/parallel.hpp"
#include "robust_gait/random.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

using namespace robust_gait;

namespace
{

template <class F>
double best_of(int reps, F && f)
{
  double best = 1e300;
  for(int r = 0; r < reps; ++r)
  {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char * name, double serial, double parallel, bool same)
{
  std::printf("%-24s serial %9.3f ms  omp %9.3f ms  speedup %5.2fx  %s\n", name, 1e3 * serial, 1e3 * parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char ** argv)
{
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads %d, best of %d\n", par::max_threads(), reps);

  // EI over the proposal candidate set of a 30-point model
  RandomStream rng(7);
  std::vector<Eigen::Vector2d> x;
  Eigen::VectorXd y(30);
  for(int i = 0; i < 30; ++i)
  {
    x.emplace_back(rng.uniform(), rng.uniform());
    y[i] = bo::warp(rng.uniform(0.0, 80.0));
  }
  const bo::GpModel model = bo::gp_fit(x, y);
  const auto cands = bo::shifted_halton(4096, rng);
  std::vector<double> a(cands.size()), b(cands.size());
  const double best = y.minCoeff();
  const double ts = best_of(reps, [&] { par::expected_improvement_scan_serial(model, cands, best, b); });
  const double tp = best_of(reps, [&] { par::expected_improvement_scan(model, cands, best, a); });
  row("ei_scan[4096]", ts, tp, a == b);

  // closed-loop rollouts of a small weight grid
  harness::ExperimentConfig config = harness::default_config();
  const bo::Objective objective = harness::make_objective(config, 'd');
  std::vector<Eigen::Vector2d> pts;
  for(int i = 0; i < 4; ++i)
    for(int j = 0; j < 4; ++j) pts.emplace_back(1000.0 * i / 3.0, 1000.0 * j / 3.0);
  std::vector<bo::ObjectiveValue> ps, pp;
  const double rs = best_of(std::max(1, reps / 2), [&] { ps = par::evaluate_points_serial(objective, pts); });
  const double rp = best_of(std::max(1, reps / 2), [&] { pp = par::evaluate_points(objective, pts); });
  bool same = ps.size() == pp.size();
  for(std::size_t i = 0; same && i < ps.size(); ++i) same = ps[i].J == pp[i].J && ps[i].fell == pp[i].fell;
  row("evaluate_points[16]", rs, rp, same);
  return 0;
}
