#include "robust_gait/harness.hpp"

#include "robust_gait/parallel.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace robust_gait::harness
{

namespace
{

std::string num(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string & s, const std::string & where)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if(res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error(where + ": not a number: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string & line, char sep)
{
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string item;
  while(std::getline(in, item, sep)) out.push_back(item);
  if(!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const std::string & path)
{
  std::ofstream out(path, std::ios::binary);
  if(!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

/// Lines of a CSV file after checking the header.
std::vector<std::vector<std::string>> read_csv(const std::string & path, const std::string & header)
{
  std::ifstream in(path);
  if(!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if(!std::getline(in, line) || line != header)
    throw std::runtime_error(path + ": expected header '" + header + "'");
  const std::size_t columns = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while(std::getline(in, line))
  {
    ++line_no;
    if(line.empty()) continue;
    auto row = split(line, ',');
    if(row.size() != columns)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns)
                               + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace

plant::RolloutResult rollout_at(const ExperimentConfig & config, char label, const Eigen::Vector2d & delta)
{
  const qp::Weights w{1.0, delta[0], delta[1]};
  return plant::rollout(w, config.scenario(label), config.sim);
}

bo::Objective make_objective(const ExperimentConfig & config, char label)
{
  const plant::DisturbanceScenario scenario = config.scenario(label);
  const plant::SimConfig sim = config.sim;
  const bo::OuterCostParams cost = config.tuner.cost;
  const std::vector<Eigen::Vector2d> v_des(static_cast<std::size_t>(sim.n_control_samples()), sim.v_des);
  return [scenario, sim, cost, v_des](const Eigen::Vector2d & delta) {
    const plant::RolloutResult r = plant::rollout({1.0, delta[0], delta[1]}, scenario, sim);
    return bo::ObjectiveValue{bo::outer_cost(r, v_des, cost), r.fell};
  };
}

RunReport run_scenario(char label, const ExperimentConfig & config)
{
  config.validate();
  config.scenario(label);
  const auto t0 = std::chrono::steady_clock::now();

  RunReport report;
  report.config = config;
  report.label = label;
  report.history = bo::tune(make_objective(config, label), config.tune_options());

  const plant::RolloutResult best = rollout_at(config, label, report.history.best_delta);
  report.best_fell = best.fell;

  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  const std::string suffix = std::string(1, label);
  const std::string history_name = "history_" + suffix + ".csv";
  const std::string trajectory_name = "trajectory_" + suffix + ".csv";
  const std::string report_name = "report_" + suffix + ".txt";
  report.artifacts = {history_name, trajectory_name, report_name};

  write_history_csv(report.history, (dir / history_name).string());
  plant::write_trajectory_csv(best, (dir / trajectory_name).string());
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  open_out((dir / report_name).string()) << format_report(report);
  return report;
}

std::string format_report(const RunReport & report)
{
  const bo::TuneHistory & h = report.history;
  int falls = 0;
  for(const auto & s : h.samples) falls += s.fell ? 1 : 0;
  std::string out;
  out += "label=" + std::string(1, report.label) + "\n";
  out += "evaluations=" + std::to_string(h.samples.size()) + "\n";
  out += "falls=" + std::to_string(falls) + "\n";
  out += "best_beta=" + num(h.best_delta[0]) + "\n";
  out += "best_gamma=" + num(h.best_delta[1]) + "\n";
  out += "best_J=" + num(h.best_J) + "\n";
  out += "best_fell=" + std::to_string(report.best_fell ? 1 : 0) + "\n";
  out += "artifacts=";
  for(std::size_t i = 0; i < report.artifacts.size(); ++i) out += (i ? "," : "") + report.artifacts[i];
  out += "\n# config\n" + serialize(report.config);
  return out;
}

GridResult grid_search(char label, const ExperimentConfig & config, int grid_n, bool parallel)
{
  if(grid_n < 2) throw InvalidParameter("grid_n must be at least 2");
  config.validate();
  const bo::Objective objective = make_objective(config, label);

  std::vector<Eigen::Vector2d> points;
  GridResult result;
  for(int i = 0; i < grid_n; ++i)
  {
    for(int j = 0; j < grid_n; ++j)
    {
      const Eigen::Vector2d u(static_cast<double>(i) / (grid_n - 1), static_cast<double>(j) / (grid_n - 1));
      GridCell cell;
      cell.i = i;
      cell.j = j;
      cell.delta = config.bounds.from_unit(u);
      points.push_back(cell.delta);
      result.table.push_back(cell);
    }
  }
  const std::vector<bo::ObjectiveValue> values =
      parallel ? par::evaluate_points(objective, points) : par::evaluate_points_serial(objective, points);
  for(std::size_t k = 0; k < values.size(); ++k)
  {
    result.table[k].J = values[k].J;
    result.table[k].fell = values[k].fell;
    if(k == 0 || values[k].J < result.best_J)
    {
      result.best_J = values[k].J;
      result.best_delta = result.table[k].delta;
    }
  }
  return result;
}

void write_grid_csv(const GridResult & grid, const std::string & path)
{
  std::ofstream out = open_out(path);
  out << "i,j,beta,gamma,J,fell\n";
  for(const GridCell & c : grid.table)
  {
    out << c.i << ',' << c.j << ',' << num(c.delta[0]) << ',' << num(c.delta[1]) << ',' << num(c.J) << ','
        << (c.fell ? 1 : 0) << '\n';
  }
}

void write_history_csv(const bo::TuneHistory & history, const std::string & path)
{
  std::ofstream out = open_out(path);
  out << "call_index,beta,gamma,J,fell,min_so_far\n";
  for(std::size_t k = 0; k < history.samples.size(); ++k)
  {
    const bo::ObjectiveSample & s = history.samples[k];
    out << s.eval_index << ',' << num(s.delta[0]) << ',' << num(s.delta[1]) << ',' << num(s.J) << ','
        << (s.fell ? 1 : 0) << ',' << num(history.min_so_far[k]) << '\n';
  }
}

bo::TuneHistory read_history_csv(const std::string & path)
{
  bo::TuneHistory h;
  int line = 1;
  for(const auto & row : read_csv(path, "call_index,beta,gamma,J,fell,min_so_far"))
  {
    const std::string where = path + ":" + std::to_string(++line);
    bo::ObjectiveSample s;
    s.eval_index = static_cast<int>(to_double(row[0], where));
    s.delta = {to_double(row[1], where), to_double(row[2], where)};
    s.J = to_double(row[3], where);
    s.fell = row[4] == "1";
    s.capped = s.J == bo::kPenaltyCap;
    h.push(s);
    if(h.min_so_far.back() != to_double(row[5], where))
      throw std::runtime_error(where + ": min_so_far is not the running minimum of J");
  }
  return h;
}

void emit_plot_data(const bo::TuneHistory & history, const std::string & path)
{
  if(history.samples.empty()) throw InvalidParameter("cannot emit plot data for an empty history");
  std::ofstream out = open_out(path);
  out << "call_index,J,min_so_far\n";
  for(std::size_t k = 0; k < history.samples.size(); ++k)
    out << history.samples[k].eval_index << ',' << num(history.samples[k].J) << ',' << num(history.min_so_far[k])
        << '\n';
}

PlotData parse_plot_data(const std::string & path)
{
  PlotData d;
  int line = 1;
  for(const auto & row : read_csv(path, "call_index,J,min_so_far"))
  {
    const std::string where = path + ":" + std::to_string(++line);
    d.call_index.push_back(static_cast<int>(to_double(row[0], where)));
    d.J.push_back(to_double(row[1], where));
    d.min_so_far.push_back(to_double(row[2], where));
  }
  return d;
}

} // namespace robust_gait::harness
