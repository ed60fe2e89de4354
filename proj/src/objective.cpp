#include "spades/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace spades {

double deviation_rate(long m, long n, double delta) {
  if (m < 1 || n < 1) throw std::invalid_argument("deviation_rate: m, n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("deviation_rate: delta must be in (0,1)");
  }
  return std::sqrt(std::log(static_cast<double>(m) / delta) / static_cast<double>(n));
}

double selection_rate(long m, long n, double delta) {
  return deviation_rate(2 * m * m, n, delta);
}

double mixture_envelope(const Dictionary& dict) {
  return std::max(1.0 / std::sqrt(3.0), dict.sup_norms().maxCoeff());
}

WeightSpec make_weights(const Dictionary& dict, const EmpiricalMoments& moments,
                        long n, double delta, WeightVariant variant) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("make_weights: delta must be in (0,1)");
  }
  const int m = dict.size();
  WeightSpec spec;
  spec.variant = variant;
  spec.delta = delta;
  spec.omega.resize(m);
  const Eigen::VectorXd& L = dict.sup_norms();

  switch (variant) {
    case WeightVariant::simple: {
      const double r = deviation_rate(m, n, delta / 2.0);
      spec.omega = 4.0 * r * L;
      break;
    }
    case WeightVariant::bernstein: {
      const double r = deviation_rate(m, n, delta / 2.0);
      for (int j = 0; j < m; ++j) {
        const double var =
            std::max(0.0, moments.second_moment(j) - moments.c(j) * moments.c(j));
        spec.omega(j) =
            2.0 * std::sqrt(2.0 * var) * r + (8.0 / 3.0) * L(j) * r * r;
      }
      break;
    }
    case WeightVariant::data_driven: {
      const double r = deviation_rate(m, n, delta / 2.0);
      for (int j = 0; j < m; ++j) {
        const double t2 = 2.0 * moments.second_moment(j) + 2.0 * L(j) * L(j) * r * r;
        spec.omega(j) = 2.0 * std::sqrt(2.0 * t2) * r + (8.0 / 3.0) * L(j) * r * r;
      }
      break;
    }
    case WeightVariant::mixture: {
      const double r = selection_rate(m, n, delta);
      spec.omega.setConstant(4.0 * mixture_envelope(dict) * r);
      break;
    }
    case WeightVariant::scalar:
      throw std::invalid_argument("make_weights: use scalar_weights for a constant");
  }
  if ((spec.omega.array() <= 0.0).any()) {
    throw std::logic_error("make_weights: produced a nonpositive weight");
  }
  return spec;
}

WeightSpec scalar_weights(double w, int m) {
  if (w < 0.0) throw std::invalid_argument("scalar_weights: negative weight");
  WeightSpec spec;
  spec.variant = WeightVariant::scalar;
  spec.scalar_value = w;
  spec.omega = Eigen::VectorXd::Constant(m, w);
  return spec;
}

std::vector<int> support_of(const Eigen::VectorXd& lambda, double tol) {
  std::vector<int> idx;
  for (int j = 0; j < lambda.size(); ++j) {
    if (std::abs(lambda(j)) > tol) idx.push_back(j);
  }
  return idx;
}

double empirical_loss(const Eigen::VectorXd& lambda, const EmpiricalMoments& moments,
                      const Eigen::MatrixXd& gram) {
  return -2.0 * lambda.dot(moments.c) + lambda.dot(gram * lambda);
}

double penalized_objective(const Eigen::VectorXd& lambda,
                           const EmpiricalMoments& moments,
                           const Eigen::MatrixXd& gram, const WeightSpec& weights) {
  return empirical_loss(lambda, moments, gram) +
         2.0 * weights.omega.dot(lambda.cwiseAbs());
}

double coordinate_gradient(int j, const Eigen::VectorXd& lambda,
                           const EmpiricalMoments& moments,
                           const Eigen::MatrixXd& gram) {
  return -2.0 * moments.c(j) + 2.0 * gram.col(j).dot(lambda);
}

double l2_error_in_span(const Eigen::VectorXd& lambda_hat,
                        const Eigen::VectorXd& lambda_star,
                        const Eigen::MatrixXd& gram) {
  const Eigen::VectorXd delta = lambda_hat - lambda_star;
  return delta.dot(gram * delta);
}

}  // namespace spades
