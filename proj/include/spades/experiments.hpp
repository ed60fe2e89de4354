#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "spades/theory.hpp"
#include "spades/tuning.hpp"

namespace spades {

/// A known finite mixture over dictionary atoms. `mixture_weights` are the
/// probabilities on the raw densities p_j (they sum to one);
/// `normalized_weights` are the matching coefficients on the unit-norm atoms,
/// weight * ||p_j||.
struct MixtureTruth {
  std::vector<int> components;
  Eigen::VectorXd mixture_weights;
  Eigen::VectorXd normalized_weights;

  /// Coefficients as a dense length-M vector.
  Eigen::VectorXd full_vector(int m) const;
};

MixtureTruth make_mixture_truth(const Dictionary& dict, std::vector<int> components,
                                Eigen::VectorXd probabilities);

/// Draws n points from the mixture: a component index from the categorical
/// distribution, then a Gaussian draw from that component. Deterministic
/// under the seed; n = 0 yields an empty sample.
SampleSet sample_mixture(const MixtureTruth& truth, const Dictionary& dict, long n,
                         std::uint64_t seed);

enum class SelectionMode { cross_validation, fixed_weights };

struct StudyConfig {
  int k_star = 2;
  double spacing = 4.0;
  double tau = 1.0;
  std::vector<int> m_grid;
  std::vector<long> n_grid;
  int replicates = 100;
  double delta = 0.1;
  std::uint64_t seed = 1;
  SelectionMode selection = SelectionMode::cross_validation;
  int folds = 10;
  int threads = 1;
  SolverSettings solver;
  std::vector<double> separation_grid;  // separation study only
};

/// Aggregates over replicates of one (m, n, spacing) cell. Quartiles use
/// linear interpolation on the sorted values; a replicate is a hit only when
/// the estimated support equals the true component set exactly.
struct CellResult {
  int k_star = 0;
  double spacing = 0.0;
  int m = 0;
  long n = 0;
  int replicates = 0;
  int failures = 0;
  double hit_rate = 0.0;
  double median_l2 = 0.0;
  double q25_l2 = 0.0;
  double q75_l2 = 0.0;
  bool identifiable = false;
  bool weights_above_noise = false;
  bool separated = false;
  double runtime_seconds = 0.0;
  std::string first_error;
};

struct StudyResult {
  std::string kind;
  std::vector<CellResult> cells;
};

/// Grid over (m, n) with means at spacing * j, the true mixture on the first
/// k_star atoms with equal weights.
StudyResult run_identification_study(const StudyConfig& config);

/// Sweep over the mean spacing at fixed (m, n) = (m_grid[0], n_grid[0]).
StudyResult run_separation_study(const StudyConfig& config);

std::string study_csv(const StudyResult& result);

/// Points on a thick circle: uniform angle, radius N(radius, thickness^2).
SampleSet sample_circle(long n, std::uint64_t seed, double radius, double thickness);

/// Greedy net: scans the sample in order and keeps a point iff it is at
/// least min_dist from every point kept so far.
std::vector<Eigen::VectorXd> greedy_centers(const SampleSet& sample, double min_dist);

/// Excess empirical loss along the tuning path: rows (k, w_k, loss(k) - min),
/// sorted by k. Nonnegative by construction.
std::vector<std::tuple<int, double, double>> excess_loss_curve(
    const SampleSet& sample, const Dictionary& dict, const SolverSettings& settings);

struct CircleConfig {
  long n = 2000;
  double radius = 13.0;  // a unit-spaced greedy net then lands near 240 centers
  double thickness = 1.0;
  double min_dist = 1.0;
  double tau = 1.0;
  std::uint64_t seed = 1;
  SolverSettings solver;
};

struct CircleResult {
  int centers = 0;
  double min_loss = 0.0;
  std::vector<std::tuple<int, double, double>> curve;
};

CircleResult run_circle_study(const CircleConfig& config);

std::string circle_csv(const CircleResult& result);

/// Interpolated quantile (same convention as the study aggregates).
double quantile(std::vector<double> values, double p);

}  // namespace spades
