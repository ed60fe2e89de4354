#include "spades/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spades/parallel.hpp"
#include "spades/rng.hpp"

namespace spades {

Eigen::VectorXd MixtureTruth::full_vector(int m) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
  for (size_t i = 0; i < components.size(); ++i) {
    v(components[i]) = normalized_weights(static_cast<long>(i));
  }
  return v;
}

MixtureTruth make_mixture_truth(const Dictionary& dict, std::vector<int> components,
                                Eigen::VectorXd probabilities) {
  if (components.empty() || probabilities.size() != static_cast<long>(components.size())) {
    throw std::invalid_argument("mixture truth: components/weights mismatch");
  }
  if ((probabilities.array() <= 0.0).any()) {
    throw std::invalid_argument("mixture truth: weights must be positive");
  }
  const double total = probabilities.sum();
  if (std::abs(total - 1.0) > 1e-8) {
    throw std::invalid_argument("mixture truth: weights must sum to one");
  }
  probabilities /= total;
  MixtureTruth truth;
  truth.normalized_weights.resize(probabilities.size());
  for (size_t i = 0; i < components.size(); ++i) {
    truth.normalized_weights(static_cast<long>(i)) =
        probabilities(static_cast<long>(i)) * dict.density_norm(components[i]);
  }
  truth.components = std::move(components);
  truth.mixture_weights = std::move(probabilities);
  return truth;
}

SampleSet sample_mixture(const MixtureTruth& truth, const Dictionary& dict, long n,
                         std::uint64_t seed) {
  if (dict.kind() != Dictionary::Kind::gaussian) {
    throw std::invalid_argument("sample_mixture: requires Gaussian atoms");
  }
  const int d = dict.dim();
  Eigen::MatrixXd points(n, d);
  Rng rng(seed);
  const std::span<const double> probs(truth.mixture_weights.data(),
                                      static_cast<size_t>(truth.mixture_weights.size()));
  for (long i = 0; i < n; ++i) {
    const int comp = truth.components[rng.categorical(probs)];
    const auto& atom = dict.gaussian_atoms()[static_cast<size_t>(comp)];
    for (int j = 0; j < d; ++j) {
      points(i, j) = atom.mean(j) + atom.tau * rng.normal();
    }
  }
  return SampleSet(std::move(points));
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

constexpr double kSupportTol = 1e-10;  // refit noise guard when counting zeros

struct ReplicateOutcome {
  bool failed = false;
  bool hit = false;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

CellResult run_cell(const StudyConfig& config, const Dictionary& dict, int m, long n,
                    double spacing, std::uint64_t cell_index) {
  const auto started = std::chrono::steady_clock::now();

  std::vector<int> components(static_cast<size_t>(config.k_star));
  for (int j = 0; j < config.k_star; ++j) components[static_cast<size_t>(j)] = j;
  const Eigen::VectorXd probs =
      Eigen::VectorXd::Constant(config.k_star, 1.0 / config.k_star);
  const MixtureTruth truth = make_mixture_truth(dict, components, probs);
  const Eigen::VectorXd lambda_star = truth.full_vector(m);

  const MixtureConditions conditions =
      check_conditions_mixture(dict, lambda_star, n, config.delta);

  std::vector<ReplicateOutcome> outcomes(static_cast<size_t>(config.replicates));
  parallel_for(static_cast<size_t>(config.replicates), config.threads,
               [&](std::size_t rep) {
    ReplicateOutcome& out = outcomes[rep];
    const std::uint64_t rep_seed = mix_seed(config.seed, cell_index, rep);
    try {
      const SampleSet sample = sample_mixture(truth, dict, n, rep_seed);
      Eigen::VectorXd lambda_hat;
      if (config.selection == SelectionMode::cross_validation) {
        const CvSelection sel = cv_select(sample, dict, config.solver, config.folds,
                                          mix_seed(rep_seed, 1), /*threads=*/1);
        lambda_hat = sel.final_fit.lambda;
      } else {
        const EmpiricalMoments moments = dict.empirical_moments(sample);
        const WeightSpec weights =
            make_weights(dict, moments, n, config.delta, WeightVariant::mixture);
        lambda_hat = solve(moments, dict.gram(), weights, config.solver).lambda;
      }
      const std::vector<int> estimated = support_of(lambda_hat, kSupportTol);
      out.hit = estimated == truth.components;
      out.l2_error = l2_error_in_span(lambda_hat, lambda_star, dict.gram());
    } catch (const std::exception& e) {
      out.failed = true;
      out.error = e.what();
    }
  });

  CellResult cell;
  cell.k_star = config.k_star;
  cell.spacing = spacing;
  cell.m = m;
  cell.n = n;
  cell.replicates = config.replicates;
  cell.identifiable = conditions.identifiable;
  cell.weights_above_noise = conditions.weights_above_noise;
  cell.separated = conditions.separated;

  std::vector<double> errors;
  int hits = 0;
  for (const auto& out : outcomes) {
    if (out.failed) {
      ++cell.failures;
      if (cell.first_error.empty()) cell.first_error = out.error;
      continue;
    }
    if (out.hit) ++hits;
    errors.push_back(out.l2_error);
  }
  const int completed = config.replicates - cell.failures;
  cell.hit_rate = completed > 0 ? static_cast<double>(hits) / completed : 0.0;
  cell.median_l2 = quantile(errors, 0.5);
  cell.q25_l2 = quantile(errors, 0.25);
  cell.q75_l2 = quantile(errors, 0.75);
  cell.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return cell;
}

}  // namespace

StudyResult run_identification_study(const StudyConfig& config) {
  if (config.m_grid.empty() || config.n_grid.empty()) {
    throw std::invalid_argument("identification study: empty grid");
  }
  StudyResult result;
  result.kind = "identification";
  std::uint64_t cell_index = 0;
  for (int m : config.m_grid) {
    if (m < config.k_star) throw std::invalid_argument("identification study: m < k*");
    const Dictionary dict = Dictionary::gaussian_equispaced(config.spacing, m, config.tau);
    for (long n : config.n_grid) {
      result.cells.push_back(run_cell(config, dict, m, n, config.spacing, cell_index));
      ++cell_index;
    }
  }
  return result;
}

StudyResult run_separation_study(const StudyConfig& config) {
  if (config.m_grid.empty() || config.n_grid.empty() || config.separation_grid.empty()) {
    throw std::invalid_argument("separation study: incomplete grid");
  }
  StudyResult result;
  result.kind = "separation";
  const int m = config.m_grid.front();
  const long n = config.n_grid.front();
  std::uint64_t cell_index = 0;
  for (double spacing : config.separation_grid) {
    const Dictionary dict = Dictionary::gaussian_equispaced(spacing, m, config.tau);
    result.cells.push_back(run_cell(config, dict, m, n, spacing, cell_index));
    ++cell_index;
  }
  return result;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string study_csv(const StudyResult& result) {
  std::ostringstream out;
  out << "study,k_star,spacing,m,n,replicates,failures,hit_rate,median_l2,"
         "q25_l2,q75_l2,identifiable,weights_above_noise,separated\n";
  for (const auto& c : result.cells) {
    out << result.kind << ',' << c.k_star << ',' << format_double(c.spacing) << ','
        << c.m << ',' << c.n << ',' << c.replicates << ',' << c.failures << ','
        << format_double(c.hit_rate) << ',' << format_double(c.median_l2) << ','
        << format_double(c.q25_l2) << ',' << format_double(c.q75_l2) << ','
        << (c.identifiable ? 1 : 0) << ',' << (c.weights_above_noise ? 1 : 0) << ','
        << (c.separated ? 1 : 0) << '\n';
  }
  return out.str();
}

SampleSet sample_circle(long n, std::uint64_t seed, double radius, double thickness) {
  if (!(radius > 0.0) || !(thickness > 0.0)) {
    throw std::invalid_argument("sample_circle: radius and thickness must be positive");
  }
  Eigen::MatrixXd points(n, 2);
  Rng rng(seed);
  for (long i = 0; i < n; ++i) {
    const double angle = 2.0 * M_PI * rng.uniform();
    const double r = radius + thickness * rng.normal();
    points(i, 0) = r * std::cos(angle);
    points(i, 1) = r * std::sin(angle);
  }
  return SampleSet(std::move(points));
}

std::vector<Eigen::VectorXd> greedy_centers(const SampleSet& sample, double min_dist) {
  if (!(min_dist > 0.0)) throw std::invalid_argument("greedy_centers: min_dist <= 0");
  std::vector<Eigen::VectorXd> centers;
  for (long i = 0; i < sample.size(); ++i) {
    const Eigen::VectorXd x = sample.points().row(i).transpose();
    bool ok = true;
    for (const auto& c : centers) {
      if ((x - c).norm() < min_dist) {
        ok = false;
        break;
      }
    }
    if (ok) centers.push_back(x);
  }
  return centers;
}

namespace {

std::vector<std::tuple<int, double, double>> path_losses(const EmpiricalMoments& moments,
                                                         const Dictionary& dict,
                                                         const SolverSettings& settings,
                                                         double* min_loss_out) {
  const TuningPath path = gbm_path(moments, dict.gram(), settings, -1.0,
                                   /*store_fits=*/true);
  double min_loss = std::numeric_limits<double>::infinity();
  std::vector<std::tuple<int, double, double>> rows;
  for (const auto& [k, lambda] : path.fits) {
    const double loss = empirical_loss(lambda, moments, dict.gram());
    min_loss = std::min(min_loss, loss);
    rows.emplace_back(k, path.penalty_for_size.at(k), loss);
  }
  for (auto& row : rows) std::get<2>(row) -= min_loss;
  if (min_loss_out) *min_loss_out = min_loss;
  return rows;
}

}  // namespace

std::vector<std::tuple<int, double, double>> excess_loss_curve(
    const SampleSet& sample, const Dictionary& dict, const SolverSettings& settings) {
  const EmpiricalMoments moments = dict.empirical_moments(sample);
  return path_losses(moments, dict, settings, nullptr);
}

CircleResult run_circle_study(const CircleConfig& config) {
  const SampleSet sample =
      sample_circle(config.n, config.seed, config.radius, config.thickness);
  const std::vector<Eigen::VectorXd> centers = greedy_centers(sample, config.min_dist);
  std::vector<GaussianAtom> atoms;
  atoms.reserve(centers.size());
  for (const auto& c : centers) atoms.push_back(GaussianAtom{c, config.tau});
  const Dictionary dict = Dictionary::gaussian(std::move(atoms));

  CircleResult result;
  result.centers = static_cast<int>(centers.size());
  const EmpiricalMoments moments = dict.empirical_moments(sample);
  result.curve = path_losses(moments, dict, config.solver, &result.min_loss);
  return result;
}

std::string circle_csv(const CircleResult& result) {
  std::ostringstream out;
  out << "k,w_k,excess_loss\n";
  for (const auto& [k, w, excess] : result.curve) {
    out << k << ',' << format_double(w) << ',' << format_double(excess) << '\n';
  }
  return out.str();
}

}  // namespace spades
