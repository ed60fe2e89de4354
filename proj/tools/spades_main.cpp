#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "spades/config.hpp"
#include "spades/parallel.hpp"
#include "spades/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitDataError = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitConfigError = 4;

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct CliOptions {
  std::string config_path;
  std::string data_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string weights = "";
  std::optional<double> delta;
};

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << body;
}

// The manifest is written after every other output as the commit marker.
struct Manifest {
  std::string command;
  std::string config_path;
  std::string data_path;
  std::uint64_t seed = 0;
  std::string started = timestamp_utc();
  std::vector<std::string> outputs;

  void finish(const fs::path& out_dir) const {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    if (!data_path.empty()) j["data"] = data_path;
    j["seed"] = seed;
    j["started"] = started;
    j["finished"] = timestamp_utc();
    j["outputs"] = outputs;
    j["version"] = spades::kVersion;
    write_text(out_dir / "manifest.json", j.dump(2) + "\n");
  }
};

spades::WeightVariant parse_variant(const std::string& name) {
  if (name == "simple") return spades::WeightVariant::simple;
  if (name == "bernstein") return spades::WeightVariant::bernstein;
  if (name == "data-driven") return spades::WeightVariant::data_driven;
  if (name == "mixture") return spades::WeightVariant::mixture;
  throw spades::ConfigError("unknown weights variant: " + name);
}

spades::WeightSpec weights_from_options(const CliOptions& options,
                                        const spades::Config& config,
                                        const spades::Dictionary& dict,
                                        const spades::EmpiricalMoments& moments) {
  std::string choice = options.weights.empty()
                           ? config.get_string("weights.variant", "data-driven")
                           : options.weights;
  const double delta = options.delta ? *options.delta
                                     : config.get_double("weights.delta", 0.1);
  if (choice.rfind("scalar:", 0) == 0) {
    const double w = std::stod(choice.substr(7));
    return spades::scalar_weights(w, dict.size());
  }
  if (choice == "scalar") {
    return spades::scalar_weights(config.get_double("weights.scalar"), dict.size());
  }
  return spades::make_weights(dict, moments, moments.n, delta, parse_variant(choice));
}

json fit_to_json(const spades::SpadesFit& fit) {
  json j;
  j["lambda"] = std::vector<double>(fit.lambda.data(), fit.lambda.data() + fit.lambda.size());
  std::vector<int> support_1based;
  for (int s : fit.support) support_1based.push_back(s + 1);
  j["support"] = support_1based;
  j["omega"] = std::vector<double>(fit.weights.omega.data(),
                                   fit.weights.omega.data() + fit.weights.omega.size());
  j["objective"] = fit.objective;
  j["sweeps"] = fit.sweeps;
  j["kkt_residual"] = fit.kkt_residual;
  j["certified"] = fit.certified;
  j["converged"] = fit.converged;
  return j;
}

int cmd_fit(const CliOptions& options) {
  const spades::Config config = spades::Config::parse_file(options.config_path);
  const spades::SampleSet sample = spades::read_sample(options.data_path);
  const spades::Dictionary dict = spades::dictionary_from_config(config, sample.size());
  const spades::SolverSettings settings = spades::solver_from_config(config);
  const spades::EmpiricalMoments moments = dict.empirical_moments(sample);
  const spades::WeightSpec weights = weights_from_options(options, config, dict, moments);

  Manifest manifest;
  manifest.command = "fit";
  manifest.config_path = options.config_path;
  manifest.data_path = options.data_path;

  const spades::SpadesFit fit = spades::solve(moments, dict.gram(), weights, settings);
  const spades::CoherenceReport report = spades::coherence_report(
      dict.gram(), fit.lambda, weights, weights.delta > 0 ? weights.delta : 0.1,
      sample.size());

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);
  json j = fit_to_json(fit);
  j["n"] = sample.size();
  j["m"] = dict.size();
  write_text(out_dir / "fit.json", j.dump(2) + "\n");
  write_text(out_dir / "coherence.json", spades::to_json(report) + "\n");
  manifest.outputs = {"fit.json", "coherence.json"};
  manifest.finish(out_dir);
  if (!fit.converged) {
    std::cerr << "solver did not converge within max_sweeps\n";
    return kExitNoConvergence;
  }
  std::cout << "fit: support size " << fit.support.size() << ", objective "
            << fit.objective << "\n";
  return 0;
}

int cmd_tune(const CliOptions& options) {
  const spades::Config config = spades::Config::parse_file(options.config_path);
  const spades::SampleSet sample = spades::read_sample(options.data_path);
  const spades::Dictionary dict = spades::dictionary_from_config(config, sample.size());
  const spades::SolverSettings settings = spades::solver_from_config(config);
  const int folds = static_cast<int>(config.get_long("tune.folds", 10));
  const std::uint64_t seed =
      options.seed ? *options.seed : config.get_seed("tune.seed", 1);
  const int threads =
      options.threads > 0 ? options.threads : spades::default_thread_count();

  Manifest manifest;
  manifest.command = "tune";
  manifest.config_path = options.config_path;
  manifest.data_path = options.data_path;
  manifest.seed = seed;

  const spades::EmpiricalMoments moments = dict.empirical_moments(sample);
  const spades::TuningPath full_path =
      spades::gbm_path(moments, dict.gram(), settings);
  const spades::CvSelection selection =
      spades::cv_select(sample, dict, settings, folds, seed, threads);

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "tuning_path.csv",
             spades::tuning_csv(full_path, selection, sample.size()));
  json sel;
  sel["k_hat"] = selection.k_hat;
  sel["w_final"] = selection.w_final;
  sel["folds"] = selection.folds;
  sel["seed"] = selection.seed;
  sel["solver_calls_full_path"] = full_path.fit_count;
  write_text(out_dir / "selection.json", sel.dump(2) + "\n");
  write_text(out_dir / "fit.json", fit_to_json(selection.final_fit).dump(2) + "\n");
  manifest.outputs = {"tuning_path.csv", "selection.json", "fit.json"};
  manifest.finish(out_dir);
  std::cout << "tune: k_hat " << selection.k_hat << ", w_final " << selection.w_final
            << "\n";
  return 0;
}

int cmd_study(const CliOptions& options) {
  const spades::Config config = spades::Config::parse_file(options.config_path);
  const std::string kind = config.get_string("study.kind");
  const int threads =
      options.threads > 0 ? options.threads : spades::default_thread_count();

  Manifest manifest;
  manifest.command = "study";
  manifest.config_path = options.config_path;

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);

  if (kind == "circle") {
    spades::CircleConfig circle = spades::circle_from_config(config);
    if (options.seed) circle.seed = *options.seed;
    manifest.seed = circle.seed;
    const spades::CircleResult result = spades::run_circle_study(circle);
    write_text(out_dir / "study.csv", spades::circle_csv(result));
    json summary;
    summary["centers"] = result.centers;
    summary["min_loss"] = result.min_loss;
    write_text(out_dir / "circle_summary.json", summary.dump(2) + "\n");
    manifest.outputs = {"study.csv", "circle_summary.json"};
    manifest.finish(out_dir);
    std::cout << "study: " << result.centers << " centers, "
              << result.curve.size() << " path points\n";
    return 0;
  }

  spades::StudyConfig study = spades::study_from_config(config);
  if (options.seed) study.seed = *options.seed;
  study.threads = threads;
  manifest.seed = study.seed;
  const spades::StudyResult result = kind == "separation"
                                         ? spades::run_separation_study(study)
                                         : spades::run_identification_study(study);
  write_text(out_dir / "study.csv", spades::study_csv(result));
  manifest.outputs = {"study.csv"};
  manifest.finish(out_dir);
  int failures = 0;
  for (const auto& c : result.cells) failures += c.failures;
  std::cout << "study: " << result.cells.size() << " cells, " << failures
            << " failed replicates\n";
  return 0;
}

int cmd_gram_report(const CliOptions& options) {
  const spades::Config config = spades::Config::parse_file(options.config_path);
  const spades::SampleSet sample = spades::read_sample(options.data_path);
  const spades::Dictionary dict = spades::dictionary_from_config(config, sample.size());
  const spades::EmpiricalMoments moments = dict.empirical_moments(sample);
  const spades::WeightSpec weights = weights_from_options(options, config, dict, moments);
  const double delta =
      options.delta ? *options.delta : config.get_double("weights.delta", 0.1);

  Manifest manifest;
  manifest.command = "gram-report";
  manifest.config_path = options.config_path;
  manifest.data_path = options.data_path;

  // all-active coefficients: the report covers every atom pair
  const Eigen::VectorXd all_active = Eigen::VectorXd::Ones(dict.size());
  const spades::CoherenceReport report =
      spades::coherence_report(dict.gram(), all_active, weights, delta, sample.size());

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "gram_report.json", spades::to_json(report) + "\n");
  manifest.outputs = {"gram_report.json"};
  manifest.finish(out_dir);
  std::cout << "gram-report: min eigenvalue " << report.min_eigenvalue << "\n";
  return 0;
}

int cmd_check_conditions(const CliOptions& options) {
  const spades::Config config = spades::Config::parse_file(options.config_path);
  long n = config.get_long("truth.n", 0);
  std::optional<spades::SampleSet> sample;
  if (!options.data_path.empty()) {
    sample = spades::read_sample(options.data_path);
    n = sample->size();
  }
  if (n < 1) {
    throw spades::ConfigError("check-conditions: provide truth.n or a data file");
  }
  const spades::Dictionary dict = spades::dictionary_from_config(config, n);
  const double delta =
      options.delta ? *options.delta : config.get_double("weights.delta", 0.1);

  std::vector<int> components;
  for (long j : config.get_longs("truth.components")) {
    if (j < 1 || j > dict.size()) {
      throw spades::ConfigError("truth.components: index out of range");
    }
    components.push_back(static_cast<int>(j - 1));
  }
  const std::vector<double> raw = config.get_doubles("truth.weights");
  Eigen::VectorXd probs =
      Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<long>(raw.size()));
  const spades::MixtureTruth truth =
      spades::make_mixture_truth(dict, components, probs);
  const spades::MixtureConditions conditions = spades::check_conditions_mixture(
      dict, truth.full_vector(dict.size()), n, delta);

  Manifest manifest;
  manifest.command = "check-conditions";
  manifest.config_path = options.config_path;
  manifest.data_path = options.data_path;

  const fs::path out_dir(options.out_dir);
  fs::create_directories(out_dir);
  write_text(out_dir / "conditions.json", spades::to_json(conditions) + "\n");
  manifest.outputs = {"conditions.json"};
  manifest.finish(out_dir);
  std::cout << "check-conditions: identifiable " << conditions.identifiable
            << ", weights above noise " << conditions.weights_above_noise << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse density estimation by l1-penalized empirical L2 loss"};
  app.require_subcommand(1);

  CliOptions options;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--config", options.config_path, "key = value configuration file")
        ->required();
    auto* data = cmd->add_option("--data", options.data_path,
                                 "numeric text data file, one observation per row");
    if (needs_data) data->required();
    cmd->add_option("--out-dir", options.out_dir, "output directory");
    cmd->add_option("--seed", options.seed, "overrides the config seed");
    cmd->add_option("--threads", options.threads, "worker cap for studies and folds");
    cmd->add_option("--weights", options.weights,
                    "simple|bernstein|data-driven|scalar:<w>|mixture");
    cmd->add_option("--delta", options.delta, "confidence level in (0,1)");
  };

  auto* fit = app.add_subcommand("fit", "penalized fit with optimality certificate");
  add_common(fit, true);
  auto* tune = app.add_subcommand("tune", "tuning path and cross-validated selection");
  add_common(tune, true);
  auto* study = app.add_subcommand("study", "simulation studies from a study config");
  add_common(study, false);
  auto* gram = app.add_subcommand("gram-report", "coherence diagnostics of a dictionary");
  add_common(gram, true);
  auto* check =
      app.add_subcommand("check-conditions", "recovery conditions for a known mixture");
  add_common(check, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(options);
    if (tune->parsed()) return cmd_tune(options);
    if (study->parsed()) return cmd_study(options);
    if (gram->parsed()) return cmd_gram_report(options);
    if (check->parsed()) return cmd_check_conditions(options);
  } catch (const spades::DataParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const spades::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
