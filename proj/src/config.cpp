#include "robust_gait/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace robust_gait::harness
{

namespace
{

constexpr char kLabels[] = {'a', 'b', 'c', 'd'};

std::string trim(const std::string & s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if(first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string & s)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if(res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

template<typename Int>
Int parse_int(const std::string & s)
{
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if(res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

std::string format_pushes(const std::vector<plant::Push> & pushes)
{
  std::string out;
  for(std::size_t i = 0; i < pushes.size(); ++i)
  {
    const plant::Push & p = pushes[i];
    if(i > 0) out += "; ";
    out += format_double(p.t_start) + " " + format_double(p.duration) + " " + format_double(p.force.x()) + " "
           + format_double(p.force.y());
  }
  return out;
}

// "t_start duration fx fy; t_start duration fx fy; ..."
std::vector<plant::Push> parse_pushes(const std::string & s)
{
  std::vector<plant::Push> out;
  std::stringstream groups(s);
  std::string group;
  while(std::getline(groups, group, ';'))
  {
    group = trim(group);
    if(group.empty()) continue;
    std::stringstream fields(group);
    std::vector<std::string> parts;
    std::string part;
    while(fields >> part) parts.push_back(part);
    if(parts.size() != 4) throw ConfigError("push needs 't_start duration fx fy', got '" + group + "'");
    plant::Push p;
    p.t_start = parse_double(parts[0]);
    p.duration = parse_double(parts[1]);
    p.force = {parse_double(parts[2]), parse_double(parts[3])};
    out.push_back(p);
  }
  return out;
}

struct Field
{
  std::string key;
  std::function<std::string(const ExperimentConfig &)> get;
  std::function<void(ExperimentConfig &, const std::string &)> set;
};

template<typename Ref>
Field number(std::string key, Ref ref)
{
  return {std::move(key), [ref](const ExperimentConfig & c) { return format_double(ref(const_cast<ExperimentConfig &>(c))); },
          [ref](ExperimentConfig & c, const std::string & v) { ref(c) = parse_double(v); }};
}

template<typename Int, typename Ref>
Field integer(std::string key, Ref ref)
{
  return {std::move(key),
          [ref](const ExperimentConfig & c) { return std::to_string(ref(const_cast<ExperimentConfig &>(c))); },
          [ref](ExperimentConfig & c, const std::string & v) { ref(c) = parse_int<Int>(v); }};
}

std::vector<Field> fields()
{
  std::vector<Field> f;
  f.push_back(number("sim.total_time", [](ExperimentConfig & c) -> double & { return c.sim.total_time; }));
  f.push_back(number("sim.replan_period", [](ExperimentConfig & c) -> double & { return c.sim.replan_period; }));
  f.push_back(number("sim.mass", [](ExperimentConfig & c) -> double & { return c.sim.mass; }));
  f.push_back(number("sim.fall_distance", [](ExperimentConfig & c) -> double & { return c.sim.fall_distance; }));
  f.push_back(number("sim.com_height", [](ExperimentConfig & c) -> double & { return c.sim.params.com_height; }));
  f.push_back(number("sim.gravity", [](ExperimentConfig & c) -> double & { return c.sim.params.gravity; }));
  f.push_back(number("sim.dt_plan", [](ExperimentConfig & c) -> double & { return c.sim.params.dt_plan; }));
  f.push_back(number("sim.dt_plant", [](ExperimentConfig & c) -> double & { return c.sim.params.dt_plant; }));
  f.push_back(number("sim.v_des_x", [](ExperimentConfig & c) -> double & { return c.sim.v_des.x(); }));
  f.push_back(number("sim.v_des_y", [](ExperimentConfig & c) -> double & { return c.sim.v_des.y(); }));
  f.push_back(integer<int>("sim.horizon", [](ExperimentConfig & c) -> int & { return c.sim.horizon; }));
  f.push_back(integer<int>("sim.footsteps", [](ExperimentConfig & c) -> int & { return c.sim.footsteps; }));
  f.push_back(number("sim.mu_design", [](ExperimentConfig & c) -> double & { return c.sim.mu_design; }));

  f.push_back(number("geom.half_length", [](ExperimentConfig & c) -> double & { return c.sim.geom.half_length; }));
  f.push_back(number("geom.half_width", [](ExperimentConfig & c) -> double & { return c.sim.geom.half_width; }));
  f.push_back(number("geom.step_width", [](ExperimentConfig & c) -> double & { return c.sim.geom.step_width; }));
  f.push_back(number("geom.step_time", [](ExperimentConfig & c) -> double & { return c.sim.geom.step_time; }));
  f.push_back(number("geom.reach_half_x", [](ExperimentConfig & c) -> double & { return c.sim.geom.reach_half_x; }));
  f.push_back(number("geom.reach_half_y", [](ExperimentConfig & c) -> double & { return c.sim.geom.reach_half_y; }));
  f.push_back({"geom.first_support",
               [](const ExperimentConfig & c) {
                 return std::string(c.sim.geom.side0 == footstep::Side::left ? "left" : "right");
               },
               [](ExperimentConfig & c, const std::string & v) {
                 if(v == "left")
                   c.sim.geom.side0 = footstep::Side::left;
                 else if(v == "right")
                   c.sim.geom.side0 = footstep::Side::right;
                 else
                   throw ConfigError("geom.first_support must be 'left' or 'right'");
               }});

  for(char label : kLabels)
  {
    const std::string prefix = std::string("scenario.") + label + ".";
    auto sc = [label](ExperimentConfig & c) -> plant::DisturbanceScenario & { return c.scenarios[label]; };
    f.push_back(number(prefix + "mu_actual", [sc](ExperimentConfig & c) -> double & { return sc(c).mu_actual; }));
    f.push_back(
        number(prefix + "sensor_noise_std", [sc](ExperimentConfig & c) -> double & { return sc(c).sensor_noise_std; }));
    f.push_back(integer<std::uint64_t>(prefix + "seed",
                                       [sc](ExperimentConfig & c) -> std::uint64_t & { return sc(c).seed; }));
    f.push_back({prefix + "pushes",
                 [sc](const ExperimentConfig & c) { return format_pushes(sc(const_cast<ExperimentConfig &>(c)).pushes); },
                 [sc](ExperimentConfig & c, const std::string & v) { sc(c).pushes = parse_pushes(v); }});
  }

  f.push_back(number("tuner.lambda", [](ExperimentConfig & c) -> double & { return c.tuner.cost.lambda; }));
  f.push_back(number("tuner.h_des", [](ExperimentConfig & c) -> double & { return c.tuner.cost.h_des; }));
  f.push_back(number("tuner.threshold", [](ExperimentConfig & c) -> double & { return c.tuner.cost.threshold; }));
  f.push_back(integer<int>("tuner.budget", [](ExperimentConfig & c) -> int & { return c.tuner.budget; }));
  f.push_back(integer<int>("tuner.init_points", [](ExperimentConfig & c) -> int & { return c.tuner.init_points; }));
  f.push_back(integer<std::uint64_t>("tuner.seed", [](ExperimentConfig & c) -> std::uint64_t & { return c.tuner.seed; }));

  f.push_back(number("bounds.beta_min", [](ExperimentConfig & c) -> double & { return c.bounds.lower[0]; }));
  f.push_back(number("bounds.beta_max", [](ExperimentConfig & c) -> double & { return c.bounds.upper[0]; }));
  f.push_back(number("bounds.gamma_min", [](ExperimentConfig & c) -> double & { return c.bounds.lower[1]; }));
  f.push_back(number("bounds.gamma_max", [](ExperimentConfig & c) -> double & { return c.bounds.upper[1]; }));

  f.push_back({"output_dir", [](const ExperimentConfig & c) { return c.output_dir; },
               [](ExperimentConfig & c, const std::string & v) { c.output_dir = v; }});
  return f;
}

} // namespace

const plant::DisturbanceScenario & ExperimentConfig::scenario(char label) const
{
  const auto it = scenarios.find(label);
  if(it == scenarios.end()) throw ConfigError(std::string("scenario '") + label + "' is not defined");
  return it->second;
}

bo::TuneOptions ExperimentConfig::tune_options() const
{
  bo::TuneOptions o;
  o.budget = tuner.budget;
  o.init_points = tuner.init_points;
  o.seed = tuner.seed;
  o.bounds = bounds;
  return o;
}

void ExperimentConfig::validate() const
{
  try
  {
    sim.validate();
    for(const auto & [label, s] : scenarios)
    {
      if(label != s.label) throw ConfigError("scenario label mismatch");
      s.validate();
    }
    for(char label : kLabels) scenario(label);
    bounds.validate();
  }
  catch(const ConfigError &)
  {
    throw;
  }
  catch(const InvalidParameter & e)
  {
    if(std::string(e.what()).find("weight bounds") != std::string::npos)
      throw ConfigError(std::string(e.what()) + " (the admissible range of beta and gamma is [0, 1000])");
    throw ConfigError(e.what());
  }
  if(!(tuner.cost.lambda >= 0.0) || !(tuner.cost.threshold >= 0.0))
    throw ConfigError("tuner.lambda and tuner.threshold must be non-negative");
  if(tuner.init_points < 1) throw ConfigError("tuner.init_points must be at least 1");
  if(tuner.budget < tuner.init_points + 1) throw ConfigError("tuner.budget must exceed tuner.init_points");
  if(output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig default_config()
{
  ExperimentConfig c;
  for(char label : kLabels) c.scenarios[label] = plant::default_scenario(label);
  c.tuner.cost.h_des = c.sim.params.com_height;
  return c;
}

ExperimentConfig parse_config_text(const std::string & text, const std::string & origin)
{
  struct Entry
  {
    std::string value;
    int line = 0;
  };
  std::map<std::string, Entry> entries;
  std::stringstream in(text);
  std::string raw;
  int line_no = 0;
  while(std::getline(in, raw))
  {
    ++line_no;
    const std::string line = trim(raw);
    if(line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if(eq == std::string::npos) throw ConfigError(where + "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if(key.empty()) throw ConfigError(where + "empty key");
    if(!entries.emplace(key, Entry{trim(line.substr(eq + 1)), line_no}).second)
      throw ConfigError(where + "duplicate key '" + key + "'");
  }

  const std::vector<Field> table = fields();
  for(const auto & [key, entry] : entries)
  {
    bool known = false;
    for(const Field & f : table) known = known || f.key == key;
    if(!known) throw ConfigError(origin + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

  ExperimentConfig c = default_config();
  bool h_des_given = false;
  for(const Field & f : table)
  {
    const auto it = entries.find(f.key);
    if(it == entries.end()) continue;
    try
    {
      f.set(c, it->second.value);
    }
    catch(const ConfigError & e)
    {
      throw ConfigError(origin + ":" + std::to_string(it->second.line) + ": " + f.key + ": " + e.what());
    }
    h_des_given = h_des_given || f.key == "tuner.h_des";
  }
  // the desired terminal height follows the walking height unless set
  if(!h_des_given) c.tuner.cost.h_des = c.sim.params.com_height;
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::string & path)
{
  std::ifstream in(path);
  if(!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize(const ExperimentConfig & config)
{
  std::string out;
  for(const Field & f : fields()) out += f.key + "=" + f.get(config) + "\n";
  return out;
}

} // namespace robust_gait::harness
