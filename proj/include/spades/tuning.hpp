#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spades/solver.hpp"

namespace spades {

struct NHatResult {
  int count = 0;
  bool converged = true;
};

/// Support size of the solution at scalar penalty level w.
NHatResult n_hat(double w, const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                 const SolverSettings& settings);

/// Map from achievable support size k to a penalty level w_k with
/// n_hat(w_k) = k, discovered by queue-driven bisection.
struct TuningPath {
  std::map<int, double> penalty_for_size;
  std::map<int, Eigen::VectorXd> fits;  // populated when store_fits is set
  long fit_count = 0;                   // solver calls consumed
  double w0 = 0.0;                      // penalty certifying the empty support
};

/// Queue-driven bisection over [0, w0]. Pairs whose endpoint support counts
/// differ by more than one are split at the midpoint until the width
/// tolerance `alpha` is reached; the first w found per support size is kept.
/// alpha <= 0 selects the default 1e-6 * w0. Support sizes not reachable
/// within alpha are simply absent.
TuningPath gbm_path(const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                    const SolverSettings& settings, double alpha = -1.0,
                    bool store_fits = false);

struct TargetUnreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Plain bisection for one target support size; throws TargetUnreachable when
/// no penalty level with that support size exists within the width tolerance.
double bbm_find(int k_target, const EmpiricalMoments& moments,
                const Eigen::MatrixXd& gram, const SolverSettings& settings,
                double alpha = -1.0);

/// Unpenalized least-squares refit restricted to `support`: solves the Gram
/// subsystem, falling back to a jittered solve on singular submatrices
/// (`ridge_used` reports the fallback).
Eigen::VectorXd refit_on_support(const std::vector<int>& support,
                                 const EmpiricalMoments& moments,
                                 const Eigen::MatrixXd& gram,
                                 bool* ridge_used = nullptr);

/// Output of dimension-stabilized p-fold cross-validation.
struct CvSelection {
  int k_hat = 0;
  double w_final = 0.0;
  std::map<int, double> per_k_loss;      // averaged held-out losses L_k
  std::map<int, double> penalty_curve;   // L_k + 0.5 k log(n) / n
  int folds = 0;
  std::uint64_t seed = 0;
  SpadesFit final_fit;
};

/// Partitions the sample into `folds` contiguous blocks after one seeded
/// shuffle; per fold, discovers supports on the held-in data with gbm_path,
/// refits them without penalty and scores on the held-out block. The size
/// minimizing L_k + 0.5 k log(n)/n over sizes discovered in every fold is
/// located on the full data with bbm_find and solved. Sizes missing from
/// some fold are excluded from the argmin.
CvSelection cv_select(const SampleSet& sample, const Dictionary& dict,
                      const SolverSettings& settings, int folds,
                      std::uint64_t seed, int threads = 1);

/// CSV with fixed columns k, w_k, L_k, penalized; w_k comes from the
/// full-data path, losses from cross-validation (nan where undiscovered).
std::string tuning_csv(const TuningPath& full_path, const CvSelection& selection,
                       long n);

}  // namespace spades
