#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spades/dictionary.hpp"

namespace spades {

/// Deviation rate sqrt(log(m / delta) / n).
double deviation_rate(long m, long n, double delta);

/// Larger rate used for support selection: sqrt(log(2 m^2 / delta) / n).
double selection_rate(long m, long n, double delta);

/// Envelope constant for Gaussian mixtures: max(1/sqrt(3), max_j L_j).
double mixture_envelope(const Dictionary& dict);

enum class WeightVariant {
  simple,       // 4 L_j r(delta/2)
  bernstein,    // 2 sqrt(2) sigma_j r + (8/3) L_j r^2, empirical-sd plug-in
  data_driven,  // 2 sqrt(2) T_j r + (8/3) L_j r^2
  mixture,      // 4 L r with the selection rate, constant across atoms
  scalar,       // user-supplied constant
};

/// Penalty weights omega_1..omega_M plus the parameters that produced them.
struct WeightSpec {
  WeightVariant variant = WeightVariant::scalar;
  double delta = 0.1;
  double scalar_value = 0.0;
  Eigen::VectorXd omega;

  int size() const { return static_cast<int>(omega.size()); }
};

WeightSpec make_weights(const Dictionary& dict, const EmpiricalMoments& moments,
                        long n, double delta, WeightVariant variant);

WeightSpec scalar_weights(double w, int m);

/// Indices of nonzero entries; values within `tol` of zero count as zero.
std::vector<int> support_of(const Eigen::VectorXd& lambda, double tol = 0.0);

/// Empirical L2 loss: -2 lambda'c + lambda' Gram lambda.
double empirical_loss(const Eigen::VectorXd& lambda, const EmpiricalMoments& moments,
                      const Eigen::MatrixXd& gram);

/// Empirical loss plus twice the weighted l1 penalty.
double penalized_objective(const Eigen::VectorXd& lambda,
                           const EmpiricalMoments& moments,
                           const Eigen::MatrixXd& gram, const WeightSpec& weights);

/// Partial derivative of the empirical loss: -2 c_j + 2 (Gram lambda)_j.
double coordinate_gradient(int j, const Eigen::VectorXd& lambda,
                           const EmpiricalMoments& moments,
                           const Eigen::MatrixXd& gram);

/// Exact squared L2 distance between two expansions on the same dictionary:
/// (a - b)' Gram (a - b).
double l2_error_in_span(const Eigen::VectorXd& lambda_hat,
                        const Eigen::VectorXd& lambda_star,
                        const Eigen::MatrixXd& gram);

}  // namespace spades
