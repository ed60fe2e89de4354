#include "spades/tuning.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <sstream>

#include "spades/parallel.hpp"
#include "spades/rng.hpp"

namespace spades {

namespace {

double default_alpha(double alpha, double w0) {
  return alpha > 0.0 ? alpha : 1e-6 * w0;
}

// Solves at scalar penalties, warm-starting each solve from the nearest
// previously solved level. Certified optima do not depend on the start; the
// cache only buys speed.
class PathSolver {
 public:
  PathSolver(const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
             const SolverSettings& settings)
      : moments_(moments), gram_(gram), settings_(settings) {}

  const SpadesFit& fit_at(double w) {
    auto hit = cache_.find(w);
    if (hit != cache_.end()) return hit->second;
    std::optional<Eigen::VectorXd> warm;
    if (!cache_.empty()) {
      auto above = cache_.lower_bound(w);
      if (above == cache_.end()) {
        warm = std::prev(above)->second.lambda;
      } else if (above == cache_.begin()) {
        warm = above->second.lambda;
      } else {
        auto below = std::prev(above);
        warm = (w - below->first <= above->first - w) ? below->second.lambda
                                                      : above->second.lambda;
      }
    }
    SpadesFit fit = solve(moments_, gram_, scalar_weights(w, static_cast<int>(gram_.rows())),
                          settings_, warm);
    ++solve_count_;
    return cache_.emplace(w, std::move(fit)).first->second;
  }

  int count_at(double w) { return static_cast<int>(fit_at(w).support.size()); }

  long solve_count() const { return solve_count_; }

 private:
  const EmpiricalMoments& moments_;
  const Eigen::MatrixXd& gram_;
  const SolverSettings& settings_;
  std::map<double, SpadesFit> cache_;
  long solve_count_ = 0;
};

double empty_support_level(const EmpiricalMoments& moments) {
  return moments.c.cwiseAbs().maxCoeff() + 1e-12;
}

}  // namespace

NHatResult n_hat(double w, const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                 const SolverSettings& settings) {
  if (w < 0.0) throw std::invalid_argument("n_hat: negative penalty level");
  const SpadesFit fit =
      solve(moments, gram, scalar_weights(w, static_cast<int>(gram.rows())), settings);
  return NHatResult{static_cast<int>(fit.support.size()), fit.converged};
}

TuningPath gbm_path(const EmpiricalMoments& moments, const Eigen::MatrixXd& gram,
                    const SolverSettings& settings, double alpha, bool store_fits) {
  TuningPath path;
  path.w0 = empty_support_level(moments);
  const double width_tol = default_alpha(alpha, path.w0);

  PathSolver solver(moments, gram, settings);
  auto record = [&](double w, const SpadesFit& fit) {
    const int k = static_cast<int>(fit.support.size());
    if (!path.penalty_for_size.count(k)) {
      path.penalty_for_size.emplace(k, w);
      if (store_fits) path.fits.emplace(k, fit.lambda);
    }
    return k;
  };

  // the unpenalized endpoint is solved first, from the cold start, so its
  // recorded support survives cold re-verification on instances where many
  // moments underflow to exact zeros
  record(0.0, solver.fit_at(0.0));
  record(path.w0, solver.fit_at(path.w0));

  std::deque<std::pair<double, double>> queue;  // (a, b) with a > b
  queue.emplace_back(path.w0, 0.0);

  while (!queue.empty()) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    const double w = 0.5 * (a + b);
    const int k = record(w, solver.fit_at(w));
    if (std::abs(solver.count_at(a) - k) > 1 && std::abs(a - w) > width_tol) {
      queue.emplace_back(a, w);
    }
    if (std::abs(solver.count_at(b) - k) > 1 && std::abs(b - w) > width_tol) {
      queue.emplace_back(w, b);
    }
  }
  path.fit_count = solver.solve_count();
  return path;
}

double bbm_find(int k_target, const EmpiricalMoments& moments,
                const Eigen::MatrixXd& gram, const SolverSettings& settings,
                double alpha) {
  const int m = static_cast<int>(gram.rows());
  if (k_target < 0 || k_target > m) {
    throw TargetUnreachable("bbm_find: impossible support size " +
                            std::to_string(k_target));
  }
  const double w0 = empty_support_level(moments);
  const double width_tol = default_alpha(alpha, w0);
  PathSolver solver(moments, gram, settings);

  double hi = w0;  // support only shrinks as w grows
  double lo = 0.0;
  if (solver.count_at(hi) == k_target) return hi;
  if (solver.count_at(lo) == k_target) return lo;
  if (k_target > solver.count_at(lo) || k_target < solver.count_at(hi)) {
    throw TargetUnreachable("bbm_find: size " + std::to_string(k_target) +
                            " outside achievable range");
  }
  while (hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    const int k = solver.count_at(mid);
    if (k == k_target) return mid;
    if (k > k_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw TargetUnreachable("bbm_find: size " + std::to_string(k_target) +
                          " not reachable within width tolerance");
}

Eigen::VectorXd refit_on_support(const std::vector<int>& support,
                                 const EmpiricalMoments& moments,
                                 const Eigen::MatrixXd& gram, bool* ridge_used) {
  if (ridge_used) *ridge_used = false;
  const int m = static_cast<int>(gram.rows());
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  if (support.empty()) {
    throw std::invalid_argument("refit_on_support: empty support");
  }
  const int s = static_cast<int>(support.size());
  Eigen::MatrixXd sub(s, s);
  Eigen::VectorXd rhs(s);
  for (int i = 0; i < s; ++i) {
    rhs(i) = moments.c(support[static_cast<size_t>(i)]);
    for (int j = 0; j < s; ++j) {
      sub(i, j) = gram(support[static_cast<size_t>(i)], support[static_cast<size_t>(j)]);
    }
  }
  Eigen::VectorXd x = sub.ldlt().solve(rhs);
  const double residual = (sub * x - rhs).cwiseAbs().maxCoeff();
  if (!x.allFinite() || residual > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
    const double jitter = 1e-10 * sub.trace() / s;
    Eigen::MatrixXd ridged = sub;
    ridged.diagonal().array() += jitter;
    x = ridged.ldlt().solve(rhs);
    if (ridge_used) *ridge_used = true;
  }
  for (int i = 0; i < s; ++i) lambda(support[static_cast<size_t>(i)]) = x(i);
  return lambda;
}

namespace {

struct FoldMoments {
  EmpiricalMoments train;
  EmpiricalMoments test;
};

// Fold-wise moments from one pass over the evaluation matrix; the sample is
// never rescanned afterwards.
std::vector<FoldMoments> fold_moments(const SampleSet& sample, const Dictionary& dict,
                                      int folds, std::uint64_t seed,
                                      EmpiricalMoments* full) {
  const long n = sample.size();
  const int m = dict.size();

  std::vector<long> perm(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  deterministic_shuffle(std::span<long>(perm), rng);

  std::vector<long> fold_of(static_cast<size_t>(n));
  const long base = n / folds, extra = n % folds;
  long pos = 0;
  for (int f = 0; f < folds; ++f) {
    const long len = base + (f < extra ? 1 : 0);
    for (long i = 0; i < len; ++i) fold_of[static_cast<size_t>(perm[static_cast<size_t>(pos + i)])] = f;
    pos += len;
  }

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(folds, m);
  Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(folds, m);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(folds);
  Eigen::VectorXd x(dict.dim());
  for (long i = 0; i < n; ++i) {
    const long f = fold_of[static_cast<size_t>(i)];
    counts(f) += 1.0;
    x = sample.points().row(i).transpose();
    for (int j = 0; j < m; ++j) {
      const double v = dict.evaluate(j, x);
      sum(f, j) += v;
      sum_sq(f, j) += v * v;
    }
  }
  const Eigen::RowVectorXd total = sum.colwise().sum();
  const Eigen::RowVectorXd total_sq = sum_sq.colwise().sum();
  if (full) {
    full->n = n;
    full->c = total.transpose() / static_cast<double>(n);
    full->second_moment = total_sq.transpose() / static_cast<double>(n);
  }

  std::vector<FoldMoments> result(static_cast<size_t>(folds));
  for (int f = 0; f < folds; ++f) {
    auto& fm = result[static_cast<size_t>(f)];
    const double n_test = counts(f);
    const double n_train = static_cast<double>(n) - n_test;
    fm.test.n = static_cast<long>(n_test);
    fm.test.c = sum.row(f).transpose() / n_test;
    fm.test.second_moment = sum_sq.row(f).transpose() / n_test;
    fm.train.n = static_cast<long>(n_train);
    fm.train.c = (total - sum.row(f)).transpose() / n_train;
    fm.train.second_moment = (total_sq - sum_sq.row(f)).transpose() / n_train;
  }
  return result;
}

}  // namespace

CvSelection cv_select(const SampleSet& sample, const Dictionary& dict,
                      const SolverSettings& settings, int folds, std::uint64_t seed,
                      int threads) {
  if (folds < 2) throw std::invalid_argument("cv_select: need at least 2 folds");
  if (sample.size() < folds) throw std::invalid_argument("cv_select: n < folds");

  EmpiricalMoments full;
  const std::vector<FoldMoments> fm = fold_moments(sample, dict, folds, seed, &full);
  const Eigen::MatrixXd& gram = dict.gram();
  const long n = sample.size();

  std::vector<std::map<int, double>> fold_losses(static_cast<size_t>(folds));
  parallel_for(static_cast<size_t>(folds), threads, [&](std::size_t f) {
    const TuningPath path =
        gbm_path(fm[f].train, gram, settings, -1.0, /*store_fits=*/true);
    for (const auto& [k, lambda] : path.fits) {
      if (k < 1) continue;
      const std::vector<int> support = support_of(lambda);
      const Eigen::VectorXd refit = refit_on_support(support, fm[f].train, gram);
      fold_losses[f][k] = empirical_loss(refit, fm[f].test, gram);
    }
  });

  CvSelection sel;
  sel.folds = folds;
  sel.seed = seed;
  for (const auto& [k, loss] : fold_losses[0]) {
    bool everywhere = true;
    double sum = loss;
    for (int f = 1; f < folds; ++f) {
      auto it = fold_losses[static_cast<size_t>(f)].find(k);
      if (it == fold_losses[static_cast<size_t>(f)].end()) {
        everywhere = false;
        break;
      }
      sum += it->second;
    }
    if (everywhere) sel.per_k_loss[k] = sum / folds;
  }
  if (sel.per_k_loss.empty()) {
    throw std::runtime_error("cv_select: no support size was discovered in every fold");
  }

  const double log_term = 0.5 * std::log(static_cast<double>(n)) / static_cast<double>(n);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [k, loss] : sel.per_k_loss) {
    const double penalized = loss + log_term * k;
    sel.penalty_curve[k] = penalized;
    if (penalized < best) {
      best = penalized;
      sel.k_hat = k;
    }
  }

  sel.w_final = bbm_find(sel.k_hat, full, gram, settings);
  sel.final_fit =
      solve(full, gram, scalar_weights(sel.w_final, dict.size()), settings);
  return sel;
}

std::string tuning_csv(const TuningPath& full_path, const CvSelection& selection,
                       long n) {
  std::ostringstream out;
  out << "k,w_k,L_k,penalized\n";
  std::map<int, bool> ks;
  for (const auto& [k, w] : full_path.penalty_for_size) ks[k] = true;
  for (const auto& [k, l] : selection.per_k_loss) ks[k] = true;
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double log_term = 0.5 * std::log(static_cast<double>(n)) / static_cast<double>(n);
  for (const auto& [k, unused] : ks) {
    (void)unused;
    auto w_it = full_path.penalty_for_size.find(k);
    auto l_it = selection.per_k_loss.find(k);
    const double w = w_it == full_path.penalty_for_size.end() ? nan : w_it->second;
    const double l = l_it == selection.per_k_loss.end() ? nan : l_it->second;
    const double pen = std::isnan(l) ? nan : l + log_term * k;
    out << k << ',' << fmt(w) << ',' << fmt(l) << ',' << fmt(pen) << '\n';
  }
  return out.str();
}

}  // namespace spades
