#include "spades/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace spades {

double min_eigenvalue(const Eigen::MatrixXd& a) {
  const int m = static_cast<int>(a.rows());
  if (m == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  if (m == 1) return a(0, 0);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  double gersh = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double off = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    gersh = std::min(gersh, a(i, i) - off);
  }

  double shift = gersh - 1e-8 * scale;
  Eigen::LDLT<Eigen::MatrixXd> factor;
  auto refactor = [&](double s) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() -= s;
    factor.compute(shifted);
  };
  refactor(shift);

  // generic start: a symmetric start (all ones) can be exactly orthogonal to
  // the minimal eigenvector on equal-diagonal matrices
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 0.7 * i);
  v.normalize();
  double theta = v.dot(a * v);
  double prev = std::numeric_limits<double>::infinity();
  int refinements = 0;
  for (int it = 0; it < 300; ++it) {
    Eigen::VectorXd u = factor.solve(v);
    const double norm = u.norm();
    if (!u.allFinite() || norm == 0.0) {
      shift -= 1e-6 * scale;
      refactor(shift);
      continue;
    }
    v = u / norm;
    theta = v.dot(a * v);
    const double residual = (a * v - theta * v).norm();
    if (residual <= 1e-10 * scale) return theta;
    if (it > 3 && std::abs(theta - prev) <= 1e-13 * std::max(1.0, std::abs(theta))) {
      if (refinements >= 6) break;
      // Rayleigh quotient stays above the target, so theta - residual is a
      // safe sharper shift.
      shift = theta - std::max(residual, 1e-12 * scale);
      refactor(shift);
      ++refinements;
    }
    prev = theta;
  }
  const double residual = (a * v - theta * v).norm();
  if (residual <= 1e-8 * std::max(std::abs(theta), 1e-6 * scale)) return theta;
  // stagnated (tightly clustered spectrum); fall back to a dense solve
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

double correlation(const Eigen::MatrixXd& gram, int i, int j) {
  return gram(i, j) / std::sqrt(gram(i, i) * gram(j, j));
}

double active_weight_ratio(const Eigen::MatrixXd& gram, const std::vector<int>& active,
                           const WeightSpec& weights, double rate) {
  double f = 0.0;
  for (int j : active) {
    f = std::max(f, weights.omega(j) / (rate * std::sqrt(gram(j, j))));
  }
  return f;
}

}  // namespace

CoherenceReport coherence_report(const Eigen::MatrixXd& gram,
                                 const Eigen::VectorXd& lambda,
                                 const WeightSpec& weights, double delta, long n) {
  const int m = static_cast<int>(gram.rows());
  CoherenceReport report;
  const std::vector<int> active = support_of(lambda);
  report.active_count = static_cast<int>(active.size());

  for (int i : active) {
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      report.max_coherence = std::max(report.max_coherence,
                                      std::abs(correlation(gram, i, j)));
      if (j > i) report.cumulative_coherence += std::abs(correlation(gram, i, j));
    }
  }
  for (int i = 1; i < m; ++i) {
    for (int j = 0; j < i; ++j) {
      if (gram(i, j) != 0.0) ++report.sparsity_index;
    }
  }

  const double rate = deviation_rate(m, n, delta / 2.0);
  report.active_weight_ratio = active_weight_ratio(gram, active, weights, rate);
  double g = 0.0;
  for (int j = 0; j < m; ++j) {
    g = std::max(g, rate * std::sqrt(gram(j, j)) / weights.omega(j));
  }
  report.norm_weight_ratio = g;
  report.min_eigenvalue = min_eigenvalue(gram);

  const double f = report.active_weight_ratio;
  const double sqrt_active = std::sqrt(static_cast<double>(report.active_count));
  report.max_coherence_ok =
      16.0 * g * f * report.max_coherence * report.active_count <= 1.0;
  report.cumulative_coherence_ok =
      16.0 * f * g * report.cumulative_coherence * sqrt_active <= 1.0;
  report.sparsity_ok =
      16.0 * f * static_cast<double>(report.sparsity_index) * sqrt_active <= 1.0;
  report.positive_definite = report.min_eigenvalue > 1e-12 * gram.cwiseAbs().maxCoeff();
  return report;
}

MixtureConditions check_conditions_mixture(const Dictionary& dict,
                                           const Eigen::VectorXd& lambda_star,
                                           long n, double delta) {
  if (dict.kind() != Dictionary::Kind::gaussian) {
    throw std::invalid_argument(
        "check_conditions_mixture: requires a Gaussian dictionary");
  }
  const std::vector<int> active = support_of(lambda_star);
  if (active.empty()) {
    throw std::invalid_argument("check_conditions_mixture: empty true support");
  }
  const Eigen::MatrixXd& gram = dict.gram();
  const int m = dict.size();

  MixtureConditions cond;
  cond.true_support_size = static_cast<int>(active.size());
  for (int i : active) {
    for (int j = 0; j < m; ++j) {
      if (j != i) {
        cond.max_coherence =
            std::max(cond.max_coherence, std::abs(correlation(gram, i, j)));
      }
    }
  }
  cond.identifiable = cond.max_coherence <= 1.0 / (16.0 * cond.true_support_size);

  cond.envelope = mixture_envelope(dict);
  cond.rate = selection_rate(m, n, delta);
  cond.noise_threshold = 4.0 * (std::sqrt(2.0) + 1.0) * cond.rate * cond.envelope;
  cond.min_weight = std::numeric_limits<double>::infinity();
  for (int j : active) cond.min_weight = std::min(cond.min_weight, std::abs(lambda_star(j)));
  cond.weights_above_noise = cond.min_weight > cond.noise_threshold;

  const auto& atoms = dict.gaussian_atoms();
  double min_sep = std::numeric_limits<double>::infinity();
  double tau_max = 0.0;
  for (int i = 0; i < m; ++i) {
    tau_max = std::max(tau_max, atoms[static_cast<size_t>(i)].tau);
    for (int j = 0; j < i; ++j) {
      min_sep = std::min(min_sep, (atoms[static_cast<size_t>(i)].mean -
                                   atoms[static_cast<size_t>(j)].mean)
                                      .norm());
    }
  }
  cond.min_separation = m > 1 ? min_sep : std::numeric_limits<double>::infinity();
  cond.separated = cond.min_separation * cond.min_separation >=
                   4.0 * tau_max * tau_max * std::log(16.0 * cond.true_support_size);
  return cond;
}

double oracle_bound(OracleVariant variant, const Eigen::VectorXd& lambda_ref,
                    const Eigen::VectorXd& lambda_truth, const Eigen::MatrixXd& gram,
                    const WeightSpec& weights, long n, double delta, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("oracle_bound: alpha must exceed 1");
  const double approx = l2_error_in_span(lambda_ref, lambda_truth, gram);
  const double lead = (alpha + 1.0) / (alpha - 1.0) * approx;
  const double factor = 8.0 * alpha * alpha / (alpha - 1.0);
  const std::vector<int> active = support_of(lambda_ref);

  double remainder = 0.0;
  if (variant == OracleVariant::positive_definite) {
    const double kappa = min_eigenvalue(gram);
    if (!(kappa > 0.0)) {
      throw std::invalid_argument("oracle_bound: Gram is not positive definite");
    }
    double energy = 0.0;
    for (int j : active) energy += weights.omega(j) * weights.omega(j);
    remainder = factor * energy / kappa;
  } else {
    const double rate = deviation_rate(static_cast<long>(gram.rows()), n, delta / 2.0);
    const double f = active_weight_ratio(gram, active, weights, rate);
    remainder = factor * f * f * rate * rate * static_cast<double>(active.size());
  }
  return lead + remainder;
}

double mixture_l1_bound(int k_star, double envelope, long m, long n, double delta) {
  if (k_star == 0) return 0.0;
  return 4.0 * std::sqrt(2.0) / envelope * k_star * selection_rate(m, n, delta);
}

std::string to_json(const CoherenceReport& r) {
  nlohmann::json j;
  j["max_coherence"] = r.max_coherence;
  j["cumulative_coherence"] = r.cumulative_coherence;
  j["active_weight_ratio"] = r.active_weight_ratio;
  j["norm_weight_ratio"] = r.norm_weight_ratio;
  j["sparsity_index"] = r.sparsity_index;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["active_count"] = r.active_count;
  j["max_coherence_ok"] = r.max_coherence_ok;
  j["cumulative_coherence_ok"] = r.cumulative_coherence_ok;
  j["sparsity_ok"] = r.sparsity_ok;
  j["positive_definite"] = r.positive_definite;
  return j.dump(2);
}

std::string to_json(const MixtureConditions& c) {
  nlohmann::json j;
  j["max_coherence"] = c.max_coherence;
  j["true_support_size"] = c.true_support_size;
  j["identifiable"] = c.identifiable;
  j["min_weight"] = c.min_weight;
  j["noise_threshold"] = c.noise_threshold;
  j["weights_above_noise"] = c.weights_above_noise;
  j["envelope"] = c.envelope;
  j["rate"] = c.rate;
  j["min_separation"] = c.min_separation;
  j["separated"] = c.separated;
  return j.dump(2);
}

}  // namespace spades
