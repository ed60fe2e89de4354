#include "spades/dictionary.hpp"

#include <cmath>
#include <stdexcept>

namespace spades {

namespace {

// ||p|| for an isotropic Gaussian with scale tau in dimension d.
double gaussian_density_norm(double tau, int d) {
  return std::pow(4.0 * M_PI * tau * tau, -0.25 * d);
}

// L = ||p/||p||||_inf = (pi tau^2)^(-d/4), attained at the mean.
double gaussian_sup_norm(double tau, int d) {
  return std::pow(M_PI * tau * tau, -0.25 * d);
}

}  // namespace

double gaussian_atom_inner(const GaussianAtom& a, const GaussianAtom& b) {
  const int d = static_cast<int>(a.mean.size());
  const double s2 = a.tau * a.tau + b.tau * b.tau;
  const double dist2 = (a.mean - b.mean).squaredNorm();
  // integral of p_a p_b = N(mean_a - mean_b; 0, s2 I_d), then normalize.
  const double raw = std::pow(2.0 * M_PI * s2, -0.5 * d) * std::exp(-dist2 / (2.0 * s2));
  return raw / (gaussian_density_norm(a.tau, d) * gaussian_density_norm(b.tau, d));
}

Dictionary Dictionary::gaussian(std::vector<GaussianAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("dictionary: no atoms");
  Dictionary dict;
  dict.kind_ = Kind::gaussian;
  dict.dim_ = static_cast<int>(atoms.front().mean.size());
  if (dict.dim_ < 1) throw std::invalid_argument("dictionary: dimension must be >= 1");
  for (const auto& a : atoms) {
    if (!(a.tau > 0.0)) throw std::invalid_argument("dictionary: tau must be positive");
    if (a.mean.size() != dict.dim_ || !a.mean.allFinite()) {
      throw std::invalid_argument("dictionary: bad atom mean");
    }
  }
  dict.gaussians_ = std::move(atoms);
  dict.m_ = static_cast<int>(dict.gaussians_.size());
  dict.build_gaussian_caches();
  return dict;
}

Dictionary Dictionary::gaussian_equispaced(double spacing, int count, double tau) {
  std::vector<GaussianAtom> atoms;
  atoms.reserve(static_cast<size_t>(count));
  for (int j = 1; j <= count; ++j) {
    GaussianAtom a;
    a.mean = Eigen::VectorXd::Constant(1, spacing * j);
    a.tau = tau;
    atoms.push_back(std::move(a));
  }
  return gaussian(std::move(atoms));
}

void Dictionary::build_gaussian_caches() {
  gram_.resize(m_, m_);
  sup_norms_.resize(m_);
  l2_norms_ = Eigen::VectorXd::Ones(m_);
  density_norms_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    sup_norms_(i) = gaussian_sup_norm(gaussians_[i].tau, dim_);
    density_norms_(i) = gaussian_density_norm(gaussians_[i].tau, dim_);
    gram_(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double v = gaussian_atom_inner(gaussians_[i], gaussians_[j]);
      gram_(i, j) = v;
      gram_(j, i) = v;
    }
  }
}

Dictionary Dictionary::haar(int l_max) { return haar(l_max, -1); }

Dictionary Dictionary::haar(int l_max, int atom_count) {
  if (l_max < -1) throw std::invalid_argument("haar: l_max must be >= -1");
  Dictionary dict;
  dict.kind_ = Kind::haar;
  dict.dim_ = 1;
  dict.haars_.push_back(HaarAtom{-1, 0});
  for (int l = 0; l <= l_max; ++l) {
    for (int k = 0; k < (1 << l); ++k) dict.haars_.push_back(HaarAtom{l, k});
  }
  if (atom_count >= 0) {
    if (atom_count < 1 || atom_count > static_cast<int>(dict.haars_.size())) {
      throw std::invalid_argument("haar: atom_count out of range");
    }
    dict.haars_.resize(static_cast<size_t>(atom_count));
  }
  dict.m_ = static_cast<int>(dict.haars_.size());
  dict.gram_ = Eigen::MatrixXd::Identity(dict.m_, dict.m_);
  dict.l2_norms_ = Eigen::VectorXd::Ones(dict.m_);
  dict.sup_norms_.resize(dict.m_);
  for (int j = 0; j < dict.m_; ++j) {
    const int l = dict.haars_[static_cast<size_t>(j)].level;
    dict.sup_norms_(j) = l < 0 ? 1.0 : std::pow(2.0, 0.5 * l);
  }
  return dict;
}

Dictionary Dictionary::haar_for_sample_size(long n) {
  if (n < 2) throw std::invalid_argument("haar_for_sample_size: need n >= 2");
  const double target = static_cast<double>(n) / std::log(static_cast<double>(n));
  int l_max = 0;
  while (std::pow(2.0, l_max + 1) <= target) ++l_max;
  return haar(l_max);
}

void Dictionary::check_index(int j) const {
  if (j < 0 || j >= m_) throw std::out_of_range("dictionary: atom index out of range");
}

double Dictionary::evaluate(int j, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_index(j);
  if (x.size() != dim_) throw std::invalid_argument("dictionary: dimension mismatch");
  if (kind_ == Kind::gaussian) {
    const auto& a = gaussians_[static_cast<size_t>(j)];
    const double z = (x - a.mean).squaredNorm() / (2.0 * a.tau * a.tau);
    return sup_norms_(j) * std::exp(-z);
  }
  return evaluate1d(j, x(0));
}

double Dictionary::evaluate1d(int j, double x) const {
  check_index(j);
  if (kind_ == Kind::gaussian) {
    Eigen::VectorXd v(1);
    v(0) = x;
    return evaluate(j, v);
  }
  const auto& a = haars_[static_cast<size_t>(j)];
  if (x < 0.0 || x > 1.0) return 0.0;
  if (a.level < 0) return 1.0;
  const double scale = std::pow(2.0, a.level);
  const double y = scale * x - a.position;
  if (y < 0.0 || y > 1.0) return 0.0;
  // right endpoint joins the lower half-interval so values stay in {+-2^{l/2}}
  const double height = std::pow(2.0, 0.5 * a.level);
  return y < 0.5 ? height : -height;
}

double Dictionary::density_norm(int j) const {
  check_index(j);
  if (kind_ != Kind::gaussian) {
    throw std::logic_error("density_norm: only defined for Gaussian atoms");
  }
  return density_norms_(j);
}

EmpiricalMoments Dictionary::empirical_moments(const SampleSet& sample) const {
  if (sample.empty()) throw std::invalid_argument("empirical_moments: empty sample");
  if (sample.dim() != dim_) {
    throw std::invalid_argument("empirical_moments: dimension mismatch");
  }
  EmpiricalMoments mom;
  mom.n = sample.size();
  mom.c = Eigen::VectorXd::Zero(m_);
  mom.second_moment = Eigen::VectorXd::Zero(m_);
  Eigen::VectorXd x(dim_);
  for (long i = 0; i < sample.size(); ++i) {
    x = sample.points().row(i).transpose();
    for (int j = 0; j < m_; ++j) {
      const double v = evaluate(j, x);
      mom.c(j) += v;
      mom.second_moment(j) += v * v;
    }
  }
  mom.c /= static_cast<double>(mom.n);
  mom.second_moment /= static_cast<double>(mom.n);
  return mom;
}

}  // namespace spades
