#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spades/sample.hpp"

namespace spades {

/// Isotropic Gaussian density p(x) = (2*pi*tau^2)^(-d/2) exp(-|x-mean|^2/(2 tau^2)).
/// The dictionary stores the L2-normalized version f = p / ||p||.
struct GaussianAtom {
  Eigen::VectorXd mean;
  double tau = 1.0;
};

/// Haar wavelet on [0,1]. level = -1 is the father (constant 1); for
/// level l >= 0, position k in {0, ..., 2^l - 1} indexes the dyadic shift.
struct HaarAtom {
  int level = -1;
  int position = 0;
};

/// Per-atom empirical moments of a sample: c_j = (1/n) sum_i f_j(X_i) and
/// the matching second moments (1/n) sum_i f_j(X_i)^2.
struct EmpiricalMoments {
  Eigen::VectorXd c;
  Eigen::VectorXd second_moment;
  long n = 0;
};

/// An indexed family f_1..f_M of unit-L2-norm functions with cached Gram
/// matrix and sup-norms. Immutable after construction; safe to share
/// read-only across threads.
class Dictionary {
 public:
  enum class Kind { gaussian, haar };

  static Dictionary gaussian(std::vector<GaussianAtom> atoms);

  /// 1-D means at spacing * j for j = 1..count, common scale tau.
  static Dictionary gaussian_equispaced(double spacing, int count, double tau);

  /// Father atom plus all mother atoms of levels 0..l_max.
  static Dictionary haar(int l_max);

  /// Same, truncated to the first atom_count atoms in (level, position) order.
  static Dictionary haar(int l_max, int atom_count);

  /// Resolution chosen from the sample size: largest l with 2^l <= n / log n.
  static Dictionary haar_for_sample_size(long n);

  Kind kind() const { return kind_; }
  int size() const { return m_; }
  int dim() const { return dim_; }

  /// Pointwise value of the normalized atom f_j (0-based j).
  double evaluate(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double evaluate1d(int j, double x) const;

  /// Gram matrix of inner products <f_i, f_j>. Gaussian entries use the
  /// closed-form convolution integral; Haar atoms are orthonormal.
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// Sup-norms L_j = ||f_j||_inf.
  const Eigen::VectorXd& sup_norms() const { return sup_norms_; }

  /// L2 norms of the stored (normalized) atoms; identically one.
  const Eigen::VectorXd& l2_norms() const { return l2_norms_; }

  /// ||p_j|| for Gaussian atoms: converts mixture probabilities on the raw
  /// densities into coefficients on the normalized atoms.
  double density_norm(int j) const;

  /// One pass over the sample computing c and the second moments.
  EmpiricalMoments empirical_moments(const SampleSet& sample) const;

  const std::vector<GaussianAtom>& gaussian_atoms() const { return gaussians_; }
  const std::vector<HaarAtom>& haar_atoms() const { return haars_; }

 private:
  Dictionary() = default;
  void build_gaussian_caches();
  void check_index(int j) const;

  Kind kind_ = Kind::gaussian;
  int m_ = 0;
  int dim_ = 1;
  std::vector<GaussianAtom> gaussians_;
  std::vector<HaarAtom> haars_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd sup_norms_;
  Eigen::VectorXd l2_norms_;
  Eigen::VectorXd density_norms_;
};

/// Closed-form inner product of two normalized isotropic Gaussians.
double gaussian_atom_inner(const GaussianAtom& a, const GaussianAtom& b);

}  // namespace spades
