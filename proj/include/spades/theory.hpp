#pragma once

#include <Eigen/Dense>
#include <string>

#include "spades/objective.hpp"

namespace spades {

/// Coherence quantities of a Gram matrix at a coefficient vector, plus flags
/// for the conditions under which the sparsity oracle inequalities hold.
/// Empty-support conventions: maxima and sums over the support are zero and
/// the flags are true.
struct CoherenceReport {
  double max_coherence = 0.0;         // largest |correlation| touching the support
  double cumulative_coherence = 0.0;  // sum over pairs with first index active
  double active_weight_ratio = 0.0;   // max over support of omega_j / (r ||f_j||)
  double norm_weight_ratio = 0.0;     // max over all j of r ||f_j|| / omega_j
  long sparsity_index = 0;            // nonzero off-diagonal Gram entries
  double min_eigenvalue = 0.0;
  int active_count = 0;

  bool max_coherence_ok = false;         // 16 G F rho M(lambda) <= 1
  bool cumulative_coherence_ok = false;  // 16 F G rho_cum sqrt(M(lambda)) <= 1
  bool sparsity_ok = false;              // 16 F N sqrt(M(lambda)) <= 1
  bool positive_definite = false;
};

CoherenceReport coherence_report(const Eigen::MatrixXd& gram,
                                 const Eigen::VectorXd& lambda,
                                 const WeightSpec& weights, double delta, long n);

/// Checks for exact recovery of mixture components: identifiability
/// (coherence small against the true support size), mixture weights above
/// the noise level, and the mean-separation sufficient condition for
/// Gaussian dictionaries.
struct MixtureConditions {
  double max_coherence = 0.0;
  int true_support_size = 0;
  bool identifiable = false;  // max_coherence <= 1 / (16 k*)
  double min_weight = 0.0;    // smallest normalized weight on the true support
  double noise_threshold = 0.0;  // 4 (sqrt(2) + 1) r L
  bool weights_above_noise = false;
  double envelope = 0.0;  // L = max(1/sqrt(3), max_j L_j)
  double rate = 0.0;      // selection rate
  double min_separation = 0.0;  // smallest distance between dictionary means
  bool separated = false;       // D_min^2 >= 4 tau_max^2 log(16 k*)
};

MixtureConditions check_conditions_mixture(const Dictionary& dict,
                                           const Eigen::VectorXd& lambda_star,
                                           long n, double delta);

enum class OracleVariant { max_coherence, cumulative_coherence, positive_definite };

/// Right-hand side of the sparsity oracle inequality evaluated at
/// lambda_ref, for a truth representable in the span as lambda_truth:
///   ((alpha+1)/(alpha-1)) ||f_ref - f||^2 + remainder,
/// where the remainder is (8 alpha^2/(alpha-1)) F^2 r^2 M(lambda) for the
/// coherence variants and (8 alpha^2/(alpha-1)) sum_{active} omega_j^2 / kappa
/// for the positive-definite variant.
double oracle_bound(OracleVariant variant, const Eigen::VectorXd& lambda_ref,
                    const Eigen::VectorXd& lambda_truth, const Eigen::MatrixXd& gram,
                    const WeightSpec& weights, long n, double delta, double alpha);

/// l1-recovery bound for identifiable mixtures:
/// (4 sqrt(2) / L) k* sqrt(log(2 M^2 / delta) / n).
double mixture_l1_bound(int k_star, double envelope, long m, long n, double delta);

/// Smallest eigenvalue of a symmetric matrix by shifted inverse iteration
/// (1e-8 relative, with an absolute floor at machine scale).
double min_eigenvalue(const Eigen::MatrixXd& sym);

std::string to_json(const CoherenceReport& report);
std::string to_json(const MixtureConditions& conditions);

}  // namespace spades
