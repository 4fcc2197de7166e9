#include "tudiff/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "tudiff/csv.hpp"

namespace tudiff {

const std::vector<ConfigKey>& config_registry() {
  static const std::vector<ConfigKey> registry = {
      {"run.label", ConfigType::String, "run", "label prefixing the output directory"},
      {"seed", ConfigType::Int, "0", "base seed; all randomness derives from it"},
      {"out", ConfigType::String, "out", "root directory for run outputs"},

      {"schedule.kind", ConfigType::String, "uniform-radial",
       "conventional | uniform-radial | late-expansion | ot-geodesic"},
      {"schedule.T", ConfigType::Int, "100", "number of diffusion steps"},
      {"schedule.beta_min", ConfigType::Real, "1e-4", "conventional schedule beta at k=1"},
      {"schedule.beta_max", ConfigType::Real, "0.02", "conventional schedule beta at k=T"},

      {"ambient.D", ConfigType::Int, "256", "ambient dimension after zero-padding"},
      {"ambient.d_prime", ConfigType::Int, "2", "intrinsic dimension of the clean data"},
      {"epsilon", ConfigType::Real, "0.01", "shell concentration parameter, in (0, 0.25)"},

      {"dataset.kind", ConfigType::String, "swiss-roll", "swiss-roll | gaussian-mixture"},
      {"dataset.n", ConfigType::Int, "4096", "number of training samples"},
      {"dataset.noise_scale", ConfigType::Real, "0.01", "swiss-roll jitter amplitude"},
      {"mixture.centers", ConfigType::String, "0,0.6;-0.5196,-0.3;0.5196,-0.3",
       "semicolon-separated x,y component centers"},
      {"mixture.scale", ConfigType::Real, "0.08", "per-component Gaussian scale"},

      {"model.hidden", ConfigType::String, "256,256,256", "hidden layer widths"},
      {"train.epochs", ConfigType::Int, "200", "training epochs"},
      {"train.batch_size", ConfigType::Int, "2048", "minibatch rows per Adam step"},
      {"train.lr", ConfigType::Real, "1e-3", "Adam learning rate"},
      {"train.beta1", ConfigType::Real, "0.9", "Adam first-moment decay"},
      {"train.beta2", ConfigType::Real, "0.999", "Adam second-moment decay"},
      {"train.adam_eps", ConfigType::Real, "1e-8", "Adam denominator epsilon"},
      {"train.conditional", ConfigType::Bool, "false",
       "use per-class time directions selected by label"},

      {"ortho.enabled", ConfigType::Bool, "false", "orthogonal time-space variant"},
      {"ortho.delta", ConfigType::String, "auto",
       "time-direction step length; auto = 0.05*sqrt(D-d')"},
      {"ortho.direction", ConfigType::String, "axis",
       "axis = coordinate axis after the clean block; data = least-variance direction"},
      {"ortho.project_eps", ConfigType::Bool, "true",
       "project model outputs off the time direction during sampling"},

      {"sample.n", ConfigType::Int, "4096", "rows to generate"},
      {"sample.class_id", ConfigType::Int, "-1", "class direction to sample (-1 = none)"},
      {"sample.checkpoint", ConfigType::String, "", "checkpoint path for the sample command"},
      {"sample.trajectory_dump", ConfigType::Bool, "false",
       "also write one CSV per decile timestep"},

      {"eval.n_projections", ConfigType::Int, "128", "sliced-distance projections"},
      {"eval.generated", ConfigType::String, "", "generated batch CSV for the eval command"},
      {"eval.reference", ConfigType::String, "", "reference batch CSV for the eval command"},

      {"verify.mc_n", ConfigType::Int, "10000", "Monte-Carlo draws per coverage check"},
      {"verify.n_sequences", ConfigType::Int, "1000",
       "random monotone sigma sequences for the equivalence check"},

      {"sweep.spacings", ConfigType::String, "0,0.025,0.05",
       "per-unit-time spacings; each delta = spacing*sqrt(D-d')"},
      {"sweep.seeds", ConfigType::String, "0,1,2", "seeds averaged per sweep row"},
  };
  return registry;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config::Config() {
  for (const ConfigKey& k : config_registry()) values_[k.name] = k.default_value;
}

const ConfigKey& Config::lookup(const std::string& key) const {
  for (const ConfigKey& k : config_registry()) {
    if (k.name == key) return k;
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Config::set(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like key=value, got '" + assignment + "'");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& key, const std::string& value) {
  const ConfigKey& spec = lookup(key);
  try {  // eager validation so errors point at the bad key
    switch (spec.type) {
      case ConfigType::Int:
        csv::parse_long(value);
        break;
      case ConfigType::Real:
        csv::parse_double(value);
        break;
      case ConfigType::Bool:
        if (value != "true" && value != "false" && value != "0" && value != "1") {
          throw std::invalid_argument("expects true/false");
        }
        break;
      case ConfigType::String:
        break;
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("key '" + key + "': " + e.what() + " (value '" + value + "')");
  }
  values_[key] = value;
}

long Config::get_int(const std::string& key) const {
  lookup(key);
  return csv::parse_long(values_.at(key));
}

double Config::get_real(const std::string& key) const {
  lookup(key);
  return csv::parse_double(values_.at(key));
}

bool Config::get_bool(const std::string& key) const {
  lookup(key);
  const std::string& v = values_.at(key);
  return v == "true" || v == "1";
}

const std::string& Config::get_string(const std::string& key) const {
  lookup(key);
  return values_.at(key);
}

std::vector<double> Config::get_real_list(const std::string& key) const {
  const std::string& raw = get_string(key);
  std::vector<double> out;
  if (trim(raw).empty()) return out;
  for (const std::string& f : csv::split(raw)) out.push_back(csv::parse_double(trim(f)));
  return out;
}

std::vector<long> Config::get_int_list(const std::string& key) const {
  const std::string& raw = get_string(key);
  std::vector<long> out;
  if (trim(raw).empty()) return out;
  for (const std::string& f : csv::split(raw)) out.push_back(csv::parse_long(trim(f)));
  return out;
}

}  // namespace tudiff
