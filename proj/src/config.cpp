#include "spades/config.hpp"

#include <fstream>
#include <sstream>

namespace spades {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    config.values_[key] = value;
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string raw = get_string(key);
  size_t used = 0;
  double v;
  try {
    v = std::stod(raw, &used);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + raw);
  }
  if (used != raw.size()) throw ConfigError("config key " + key + ": not a number: " + raw);
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
  const double v = get_double(key);
  const long l = static_cast<long>(v);
  if (static_cast<double>(l) != v) {
    throw ConfigError("config key " + key + ": not an integer");
  }
  return l;
}

long Config::get_long(const std::string& key, long fallback) const {
  return has(key) ? get_long(key) : fallback;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = get_string(key);
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a seed: " + raw);
  }
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::string raw = get_string(key);
  for (char& c : raw) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(raw);
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    size_t used = 0;
    double v;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": bad list entry: " + token);
    }
    if (used != token.size()) {
      throw ConfigError("config key " + key + ": bad list entry: " + token);
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}

std::vector<long> Config::get_longs(const std::string& key) const {
  std::vector<long> out;
  for (double v : get_doubles(key)) {
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) {
      throw ConfigError("config key " + key + ": not an integer list");
    }
    out.push_back(l);
  }
  return out;
}

Dictionary dictionary_from_config(const Config& config, std::optional<long> sample_size) {
  const std::string kind = config.get_string("dictionary.kind");
  if (kind == "gaussian") {
    const double tau = config.get_double("dictionary.tau", 1.0);
    if (config.has("dictionary.means")) {
      // semicolons separate points, commas or spaces separate coordinates
      const std::string raw = config.get_string("dictionary.means");
      std::vector<GaussianAtom> atoms;
      std::istringstream in(raw);
      std::string point;
      while (std::getline(in, point, ';')) {
        std::string cleaned = point;
        for (char& c : cleaned) {
          if (c == ',') c = ' ';
        }
        std::istringstream coords(cleaned);
        std::vector<double> xs;
        double x;
        while (coords >> x) xs.push_back(x);
        if (xs.empty()) continue;
        GaussianAtom atom;
        atom.mean = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<long>(xs.size()));
        atom.tau = tau;
        atoms.push_back(std::move(atom));
      }
      if (atoms.empty()) throw ConfigError("dictionary.means: no points");
      return Dictionary::gaussian(std::move(atoms));
    }
    const double spacing = config.get_double("dictionary.mean_spacing");
    const long count = config.get_long("dictionary.mean_count");
    if (count < 1) throw ConfigError("dictionary.mean_count must be >= 1");
    return Dictionary::gaussian_equispaced(spacing, static_cast<int>(count), tau);
  }
  if (kind == "haar") {
    int l_max;
    if (config.has("dictionary.l_max")) {
      l_max = static_cast<int>(config.get_long("dictionary.l_max"));
    } else if (sample_size) {
      const Dictionary sized = Dictionary::haar_for_sample_size(*sample_size);
      l_max = sized.haar_atoms().back().level;
    } else {
      throw ConfigError("haar dictionary: set dictionary.l_max or provide data");
    }
    if (config.has("dictionary.atom_count")) {
      return Dictionary::haar(l_max,
                              static_cast<int>(config.get_long("dictionary.atom_count")));
    }
    return Dictionary::haar(l_max);
  }
  throw ConfigError("dictionary.kind must be gaussian or haar, got: " + kind);
}

SolverSettings solver_from_config(const Config& config) {
  SolverSettings settings;
  settings.epsilon = config.get_double("solver.epsilon", settings.epsilon);
  settings.max_sweeps =
      static_cast<int>(config.get_long("solver.max_sweeps", settings.max_sweeps));
  settings.certificate_tol =
      config.get_double("solver.certificate_tol", settings.certificate_tol);
  settings.nonnegative = config.get_long("solver.nonnegative", 0) != 0;
  const std::string rule = config.get_string("solver.update_rule", "closed_form");
  if (rule == "closed_form") {
    settings.update_rule = SolverSettings::UpdateRule::closed_form;
  } else if (rule == "line_search") {
    settings.update_rule = SolverSettings::UpdateRule::line_search;
  } else {
    throw ConfigError("solver.update_rule must be closed_form or line_search");
  }
  return settings;
}

StudyConfig study_from_config(const Config& config) {
  StudyConfig study;
  study.k_star = static_cast<int>(config.get_long("study.k_star", 2));
  study.spacing = config.get_double("study.spacing", 4.0);
  study.tau = config.get_double("study.tau", 1.0);
  for (long m : config.get_longs("study.m_grid")) study.m_grid.push_back(static_cast<int>(m));
  study.n_grid = config.get_longs("study.n_grid");
  study.replicates = static_cast<int>(config.get_long("study.replicates", 100));
  study.delta = config.get_double("study.delta", 0.1);
  study.seed = config.get_seed("study.seed", 1);
  study.folds = static_cast<int>(config.get_long("study.folds", 10));
  const std::string mode = config.get_string("study.selection", "cv");
  if (mode == "cv") {
    study.selection = SelectionMode::cross_validation;
  } else if (mode == "fixed") {
    study.selection = SelectionMode::fixed_weights;
  } else {
    throw ConfigError("study.selection must be cv or fixed");
  }
  if (config.has("study.separation_grid")) {
    study.separation_grid = config.get_doubles("study.separation_grid");
  }
  study.solver = solver_from_config(config);
  return study;
}

CircleConfig circle_from_config(const Config& config) {
  CircleConfig circle;
  circle.n = config.get_long("study.n", 2000);
  circle.radius = config.get_double("study.radius", 13.0);
  circle.thickness = config.get_double("study.thickness", 1.0);
  circle.min_dist = config.get_double("study.min_dist", 1.0);
  circle.tau = config.get_double("study.tau", 1.0);
  circle.seed = config.get_seed("study.seed", 1);
  circle.solver = solver_from_config(config);
  return circle;
}

}  // namespace spades
