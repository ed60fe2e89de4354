#include "spades/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace spades {

namespace {

double soft_threshold(double z, double omega) {
  if (z > omega) return z - omega;
  if (z < -omega) return z + omega;
  return 0.0;
}

// One-dimensional restricted objective along coordinate j, up to terms not
// involving lambda_j: psi(t) = gram_jj t^2 - 2 z t + 2 omega |t|.
double restricted_objective(double t, double gram_jj, double z, double omega) {
  return gram_jj * t * t - 2.0 * z * t + 2.0 * omega * std::abs(t);
}

// Golden-section minimization, kept only as a parity check for the closed
// form. The restricted objective is convex so the bracket below contains
// the minimizer.
double line_search_update(double gram_jj, double z, double omega, bool nonnegative) {
  double lo = std::min({0.0, (z - omega) / gram_jj, (z + omega) / gram_jj}) - 1.0;
  double hi = std::max({0.0, (z - omega) / gram_jj, (z + omega) / gram_jj}) + 1.0;
  if (nonnegative) lo = std::max(lo, 0.0);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = restricted_objective(x1, gram_jj, z, omega);
  double f2 = restricted_objective(x2, gram_jj, z, omega);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = restricted_objective(x1, gram_jj, z, omega);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = restricted_objective(x2, gram_jj, z, omega);
    }
  }
  double t = 0.5 * (a + b);
  // snap to the kink when it is at least as good
  if (restricted_objective(0.0, gram_jj, z, omega) <=
      restricted_objective(t, gram_jj, z, omega)) {
    t = 0.0;
  }
  return t;
}

double update_value(double gram_jj, double z, double omega,
                    const SolverSettings& settings) {
  if (gram_jj <= 0.0) {
    throw std::invalid_argument("coordinate update: Gram diagonal must be positive");
  }
  if (settings.update_rule == SolverSettings::UpdateRule::line_search) {
    return line_search_update(gram_jj, z, omega, settings.nonnegative);
  }
  if (settings.nonnegative) return std::max(0.0, (z - omega) / gram_jj);
  return soft_threshold(z, omega) / gram_jj;
}

}  // namespace

double coordinate_update(int j, const Eigen::VectorXd& lambda,
                         const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                         const WeightSpec& weights, const SolverSettings& settings) {
  const double gram_jj = gram(j, j);
  const double z = moments.c(j) - gram.col(j).dot(lambda) + gram_jj * lambda(j);
  return update_value(gram_jj, z, weights.omega(j), settings);
}

SpadesFit solve(const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                const WeightSpec& weights, const SolverSettings& settings,
                const std::optional<Eigen::VectorXd>& warm_start) {
  const int m = static_cast<int>(gram.rows());
  if (weights.omega.size() != m || moments.c.size() != m) {
    throw std::invalid_argument("solve: dimension mismatch");
  }
  if (!(settings.epsilon > 0.0)) throw std::invalid_argument("solve: epsilon must be > 0");

  SpadesFit fit;
  fit.weights = weights;
  Eigen::VectorXd lambda = warm_start ? *warm_start
                                      : Eigen::VectorXd::Constant(m, 1.0 / m);
  if (lambda.size() != m) throw std::invalid_argument("solve: bad warm start size");
  if (settings.nonnegative) lambda = lambda.cwiseMax(0.0);

  // residual vector Gram * lambda, maintained incrementally
  Eigen::VectorXd glam = gram * lambda;

  int sweep = 0;
  for (; sweep < settings.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int j = 0; j < m; ++j) {
      const double gram_jj = gram(j, j);
      const double z = moments.c(j) - glam(j) + gram_jj * lambda(j);
      const double updated = update_value(gram_jj, z, weights.omega(j), settings);
      const double change = updated - lambda(j);
      if (change != 0.0) {
        lambda(j) = updated;
        glam.noalias() += change * gram.col(j);
        max_change = std::max(max_change, std::abs(change));
      }
    }
    if (max_change <= settings.epsilon) {
      fit.converged = true;
      ++sweep;
      break;
    }
  }
  fit.sweeps = sweep;
  fit.lambda = std::move(lambda);
  fit.support = support_of(fit.lambda);
  fit.objective = penalized_objective(fit.lambda, moments, gram, weights);
  const KktResult kkt =
      kkt_check(fit.lambda, moments, gram, weights, settings.certificate_tol);
  fit.kkt_residual = kkt.max_residual;
  fit.certified = kkt.certified;
  return fit;
}

KktResult kkt_check(const Eigen::VectorXd& lambda, const EmpiricalMoments& moments,
                    const Eigen::MatrixXd& gram, const WeightSpec& weights,
                    double tol) {
  KktResult result;
  const Eigen::VectorXd glam = gram * lambda;
  for (int k = 0; k < lambda.size(); ++k) {
    const double score = moments.c(k) - glam(k);
    double residual;
    if (lambda(k) != 0.0) {
      const double sign = lambda(k) > 0.0 ? 1.0 : -1.0;
      residual = std::abs(score - weights.omega(k) * sign);
    } else {
      residual = std::max(0.0, std::abs(score) - weights.omega(k));
    }
    result.max_residual = std::max(result.max_residual, residual);
  }
  result.certified = result.max_residual <= tol;
  return result;
}

}  // namespace spades
