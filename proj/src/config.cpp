#include "juice/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace juice {

namespace {

const std::map<std::string, Algorithm>& algorithm_names() {
  static const std::map<std::string, Algorithm> names{
      {"admm", Algorithm::admm},
      {"irw_admm", Algorithm::irw_admm},
      {"map_admm", Algorithm::map_admm},
      {"somp", Algorithm::somp},
      {"oracle_ls", Algorithm::oracle_ls},
      {"oracle_mmse", Algorithm::oracle_mmse},
      {"map_admm_mmse_refine", Algorithm::map_admm_mmse_refine},
  };
  return names;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

const std::set<std::string> kSweepVariables{"none", "tau_p", "M", "K", "N", "cdi_samples",
                                             "angular_std_deg"};

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [name, value] : algorithm_names())
    if (value == a) return name;
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  const auto it = algorithm_names().find(name);
  if (it == algorithm_names().end()) throw ConfigError("unknown algorithm '" + name + "'");
  return it->second;
}

void ExperimentSpec::validate() const {
  const auto& s = system;
  if (s.num_users < 1) throw ConfigError("system.N must be >= 1");
  if (s.num_active < 1 || s.num_active > s.num_users) throw ConfigError("system.K must be in [1, N]");
  if (s.num_antennas < 1) throw ConfigError("system.M must be >= 1");
  if (s.pilot_length < 1) throw ConfigError("system.tau_p must be >= 1");
  if (!(s.antenna_spacing > 0.0)) throw ConfigError("system.spacing must be > 0");
  if (!(s.angular_std_deg >= 0.0)) throw ConfigError("system.angular_std_deg must be >= 0");
  if (s.num_paths < 1) throw ConfigError("system.paths must be >= 1");
  if (!(s.cell_radius > 0.0)) throw ConfigError("system.cell_radius must be > 0");
  if (s.quadrature_size < 1000) throw ConfigError("system.quadrature must be >= 1000");
  if (!kSweepVariables.count(sweep.variable)) throw ConfigError("unknown sweep.variable '" + sweep.variable + "'");
  if (sweep.variable != "none" && sweep.values.empty()) throw ConfigError("sweep.values is empty");
  for (double v : sweep.values)
    if (!(v > 0.0)) throw ConfigError("sweep values must be positive");
  if (snr_db.empty()) throw ConfigError("snr_db is empty");
  if (algorithms.empty()) throw ConfigError("algorithms is empty");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (calibration_probes < 100) throw ConfigError("calibration.probes must be >= 100");
  const auto& p = solver;
  if (!(p.rho > 0.0) || !(p.eps_stop > 0.0) || p.l_max < 1 || p.k_max < 1)
    throw ConfigError("solver.rho, solver.eps_stop, solver.l_max, solver.k_max must be positive");
  if (!(p.beta1_scale >= 0.0) || !(p.beta2_fraction > 0.0) || !(p.eps0_fraction > 0.0) ||
      !(p.eps_thr_fraction >= 0.0))
    throw ConfigError("solver fractions must be positive");
  if (cdi.samples < 1) throw ConfigError("cdi.samples must be >= 1");
  if (!(cdi.sample_noise >= 0.0)) throw ConfigError("cdi.noise must be >= 0");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

ExperimentSpec parse_experiment_spec(std::istream& is) {
  ExperimentSpec spec;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto set_int = [](int& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = static_cast<int>(to_int(k, v)); });
  };
  auto set_double = [](double& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = to_double(k, v); });
  };
  auto set_opt = [](std::optional<double>& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = to_double(k, v); });
  };
  auto set_bool = [](bool& dst) {
    return Setter([&dst](const std::string& k, const std::string& v) { dst = to_bool(k, v); });
  };

  std::map<std::string, Setter> setters{
      {"system.N", set_int(spec.system.num_users)},
      {"system.K", set_int(spec.system.num_active)},
      {"system.M", set_int(spec.system.num_antennas)},
      {"system.tau_p", set_int(spec.system.pilot_length)},
      {"system.spacing", set_double(spec.system.antenna_spacing)},
      {"system.angular_std_deg", set_double(spec.system.angular_std_deg)},
      {"system.paths", set_int(spec.system.num_paths)},
      {"system.cell_radius", set_double(spec.system.cell_radius)},
      {"system.quadrature", set_int(spec.system.quadrature_size)},
      {"system.covariance_file", [&](const std::string&, const std::string& v) { spec.system.covariance_file = v; }},
      {"sweep.variable", [&](const std::string&, const std::string& v) { spec.sweep.variable = v; }},
      {"sweep.values", [&](const std::string& k, const std::string& v) { spec.sweep.values = to_doubles(k, v); }},
      {"snr_db", [&](const std::string& k, const std::string& v) { spec.snr_db = to_doubles(k, v); }},
      {"algorithms",
       [&](const std::string&, const std::string& v) {
         spec.algorithms.clear();
         for (const auto& name : split_list(v)) spec.algorithms.push_back(parse_algorithm(name));
       }},
      {"solver.beta1_scale", set_double(spec.solver.beta1_scale)},
      {"solver.beta1", set_opt(spec.solver.beta1)},
      {"solver.beta2_fraction", set_double(spec.solver.beta2_fraction)},
      {"solver.beta2", set_opt(spec.solver.beta2)},
      {"solver.eps0_fraction", set_double(spec.solver.eps0_fraction)},
      {"solver.eps0", set_opt(spec.solver.eps0)},
      {"solver.rho", set_double(spec.solver.rho)},
      {"solver.eps_stop", set_double(spec.solver.eps_stop)},
      {"solver.l_max", set_int(spec.solver.l_max)},
      {"solver.k_max", set_int(spec.solver.k_max)},
      {"solver.eps_thr_fraction", set_double(spec.solver.eps_thr_fraction)},
      {"solver.eps_thr", set_opt(spec.solver.eps_thr)},
      {"cdi.mode",
       [&](const std::string& k, const std::string& v) {
         if (v == "perfect") spec.cdi.mode = CdiConfig::Mode::perfect;
         else if (v == "trained") spec.cdi.mode = CdiConfig::Mode::trained;
         else throw ConfigError("key '" + k + "': expected perfect or trained");
       }},
      {"cdi.samples", set_int(spec.cdi.samples)},
      {"cdi.noise", set_double(spec.cdi.sample_noise)},
      {"trials", set_int(spec.trials)},
      {"seed", [&](const std::string& k, const std::string& v) {
         const long long s = to_int(k, v);
         if (s < 0) throw ConfigError("seed must be >= 0");
         spec.seed = static_cast<unsigned long long>(s);
       }},
      {"pilots.redraw", set_bool(spec.redraw_pilots)},
      {"calibration.probes", set_int(spec.calibration_probes)},
      {"output.wall_time", set_bool(spec.wall_time)},
      {"output.convergence", set_bool(spec.record_convergence)},
      {"threads", set_int(spec.threads)},
  };

  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second(key, value);
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse_experiment_spec(is);
}

}  // namespace juice
