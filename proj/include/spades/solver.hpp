#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spades/objective.hpp"

namespace spades {

struct SolverSettings {
  double epsilon = 1e-8;          // l_inf change per sweep at convergence
  int max_sweeps = 10000;
  double certificate_tol = 1e-6;  // subdifferential residual accepted as optimal
  enum class UpdateRule { closed_form, line_search } update_rule = UpdateRule::closed_form;
  bool nonnegative = false;       // project coordinate updates onto [0, inf)
};

/// Solution of the penalized problem with its optimality certificate.
struct SpadesFit {
  Eigen::VectorXd lambda;
  std::vector<int> support;
  WeightSpec weights;
  double objective = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
  bool certified = false;
  bool converged = false;
};

/// Exact minimizer of the objective along coordinate j with the others held
/// fixed: soft-threshold of z = c_j - sum_{l != j} Gram(j,l) lambda_l.
double coordinate_update(int j, const Eigen::VectorXd& lambda,
                         const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                         const WeightSpec& weights,
                         const SolverSettings& settings = {});

/// Cyclic coordinate descent from lambda_j = 1/M (or the warm start).
/// Non-convergence within max_sweeps is reported through `converged`,
/// not as an error.
SpadesFit solve(const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                const WeightSpec& weights, const SolverSettings& settings = {},
                const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct KktResult {
  double max_residual = 0.0;
  bool certified = false;
};

/// Subdifferential check: at a minimizer, active coordinates satisfy
/// c_k - (Gram lambda)_k = omega_k sign(lambda_k) and inactive ones satisfy
/// |c_k - (Gram lambda)_k| <= omega_k.
KktResult kkt_check(const Eigen::VectorXd& lambda, const EmpiricalMoments& moments,
                    const Eigen::MatrixXd& gram, const WeightSpec& weights,
                    double tol);

}  // namespace spades
