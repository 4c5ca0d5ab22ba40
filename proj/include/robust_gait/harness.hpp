#pragma once

#include "robust_gait/bo.hpp"
#include "robust_gait/config.hpp"
#include "robust_gait/plant.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace robust_gait::harness
{

/// outer_cost(rollout(delta)) for one scenario. Pure: safe to call concurrently.
bo::Objective make_objective(const ExperimentConfig & config, char label);

/// Rollout at the given (beta, gamma) with alpha = 1.
plant::RolloutResult rollout_at(const ExperimentConfig & config, char label, const Eigen::Vector2d & delta);

struct RunReport
{
  ExperimentConfig config;
  char label = 'a';
  bo::TuneHistory history;
  bool best_fell = false;
  double wall_seconds = 0.0; // not written to disk, outputs stay byte-reproducible
  std::vector<std::string> artifacts; // paths of the files written
};

/// Tunes (beta, gamma) for one scenario and writes into config.output_dir:
///   history_<label>.csv     call_index,beta,gamma,J,fell,min_so_far
///   trajectory_<label>.csv  rollout at the best weights
///   report_<label>.txt      key=value summary followed by the config snapshot
RunReport run_scenario(char label, const ExperimentConfig & config);

struct GridCell
{
  int i = 0; // beta index
  int j = 0; // gamma index
  Eigen::Vector2d delta = Eigen::Vector2d::Zero();
  double J = 0.0;
  bool fell = false;
};

struct GridResult
{
  Eigen::Vector2d best_delta = Eigen::Vector2d::Zero();
  double best_J = 0.0;
  std::vector<GridCell> table; // row-major in (i, j)
};

/// Exhaustive grid_n x grid_n evaluation over the bounds, corners included.
GridResult grid_search(char label, const ExperimentConfig & config, int grid_n, bool parallel = true);
void write_grid_csv(const GridResult & grid, const std::string & path);

void write_history_csv(const bo::TuneHistory & history, const std::string & path);
/// Reads back the sample columns of write_history_csv; min_so_far is recomputed and checked.
bo::TuneHistory read_history_csv(const std::string & path);

/// Plot series: call_index,J,min_so_far
void emit_plot_data(const bo::TuneHistory & history, const std::string & path);

struct PlotData
{
  std::vector<int> call_index;
  std::vector<double> J;
  std::vector<double> min_so_far;
};

PlotData parse_plot_data(const std::string & path);

std::string format_report(const RunReport & report);

} // namespace robust_gait::harness
