// Acceptance suite: one line per criterion, exit code = number of failures.
// Every tolerance and threshold is pinned here, in code.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spades/experiments.hpp"
#include "spades/rng.hpp"
#include "spades/theory.hpp"

using namespace spades;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d %-34s %s  %s\n", id, name.c_str(),
              pass ? "[PASS]" : "[FAIL]", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// --------------------------------------------------------------- criterion 1

void soft_threshold_equivalence() {
  const long n = 200;
  const Dictionary dict = Dictionary::haar(6, 127);
  Rng rng(1001);
  double worst = 0.0;
  int ok = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd pts(n, 1);
    for (long i = 0; i < n; ++i) pts(i, 0) = rng.uniform();
    const EmpiricalMoments mom = dict.empirical_moments(SampleSet(std::move(pts)));
    const WeightSpec w = make_weights(dict, mom, n, 0.1, WeightVariant::data_driven);
    const SpadesFit fit = solve(mom, dict.gram(), w, SolverSettings{});
    double dev = 0.0;
    for (int j = 0; j < dict.size(); ++j) {
      const double closed =
          mom.c(j) == 0.0
              ? 0.0
              : std::max(0.0, 1.0 - w.omega(j) / std::abs(mom.c(j))) * mom.c(j);
      dev = std::max(dev, std::abs(fit.lambda(j) - closed));
    }
    worst = std::max(worst, dev);
    if (dev <= 1e-8) ++ok;
  }
  report(1, "soft-threshold equivalence", ok == 100,
         "cases " + std::to_string(ok) + "/100 within 1e-8, max dev " + fmt(worst));
}

// --------------------------------------------------------------- criterion 2

void reference_minimizer_equivalence() {
  Rng rng(1002);
  int ok = 0;
  double worst_gap = 0.0, worst_kkt = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 2 + static_cast<int>(rng.below(11));  // 2..12
    std::vector<GaussianAtom> atoms;
    for (int j = 0; j < m; ++j) {
      GaussianAtom a;
      a.mean = Eigen::VectorXd::Constant(1, rng.uniform(0.0, 2.5 * m));
      a.tau = rng.uniform(0.7, 1.5);
      atoms.push_back(std::move(a));
    }
    const Dictionary dict = Dictionary::gaussian(std::move(atoms));
    Eigen::MatrixXd pts(100, 1);
    for (int i = 0; i < 100; ++i) {
      pts(i, 0) = rng.uniform(0.0, 2.5 * m) + rng.normal();
    }
    const EmpiricalMoments mom = dict.empirical_moments(SampleSet(std::move(pts)));
    WeightSpec w = scalar_weights(1.0, m);
    const double top = mom.c.cwiseAbs().maxCoeff();
    for (int j = 0; j < m; ++j) w.omega(j) = top * rng.uniform(0.05, 0.4);

    const SpadesFit fit = solve(mom, dict.gram(), w, SolverSettings{});
    const auto ref = oracle::reference_minimizer(mom.c, dict.gram(), w.omega);
    const double gap = std::abs(fit.objective - ref.objective);
    worst_gap = std::max(worst_gap, gap);
    worst_kkt = std::max(worst_kkt, fit.kkt_residual);
    if (gap <= 1e-6 && fit.kkt_residual <= 1e-8) ++ok;
  }
  report(2, "reference-minimizer equivalence", ok == 50,
         "cases " + std::to_string(ok) + "/50, max objective gap " + fmt(worst_gap) +
             ", max kkt " + fmt(worst_kkt));
}

// --------------------------------------------------------------- criterion 3

void gram_against_quadrature() {
  Rng rng(1003);
  int ok = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const int d = rep % 2 == 0 ? 1 : 2;
    GaussianAtom a, b;
    a.mean = Eigen::VectorXd::Zero(d);
    b.mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) {
      a.mean(i) = rng.uniform(-2.0, 2.0);
      b.mean(i) = rng.uniform(-2.0, 2.0);
    }
    a.tau = rng.uniform(0.5, 2.0);
    b.tau = rng.uniform(0.5, 2.0);
    const double closed = gaussian_atom_inner(a, b);
    const double quad = oracle::gaussian_inner_quadrature(a.mean, a.tau, b.mean, b.tau);
    const double rel = std::abs(closed - quad) / std::abs(quad);
    worst = std::max(worst, rel);
    if (rel <= 1e-6) ++ok;
  }
  report(3, "gram closed form vs quadrature", ok == 100,
         "pairs " + std::to_string(ok) + "/100, max rel err " + fmt(worst));
}

// --------------------------------------------------------- criteria 4 and 5

const CellResult& cell_at(const StudyResult& r, int m, long n) {
  for (const auto& c : r.cells) {
    if (c.m == m && c.n == n) return c;
  }
  throw std::logic_error("missing study cell");
}

void identification_studies() {
  StudyConfig k2;
  k2.k_star = 2;
  k2.spacing = 4.0;
  k2.m_grid = {25, 50, 100, 200};
  k2.n_grid = {50, 100, 200};
  k2.replicates = 100;
  k2.seed = 20260808;
  const StudyResult r2 = run_identification_study(k2);

  const double med_small = cell_at(r2, 25, 200).median_l2;
  const double med_big = cell_at(r2, 200, 200).median_l2;
  const double med50 = cell_at(r2, 200, 50).median_l2;
  const double med100 = cell_at(r2, 200, 100).median_l2;
  const double med200 = cell_at(r2, 200, 200).median_l2;
  const bool growth_ok = med_big <= 2.0 * med_small;
  const bool monotone_ok = med50 > med100 && med100 > med200;
  report(4, "error medians (two components)", growth_ok && monotone_ok,
         "median at M=200 " + fmt(med_big) + " vs M=25 " + fmt(med_small) +
             "; medians over n {" + fmt(med50) + ", " + fmt(med100) + ", " +
             fmt(med200) + "}");

  StudyConfig k5;
  k5.k_star = 5;
  k5.spacing = 5.0;
  k5.m_grid = {600};
  k5.n_grid = {300, 600};
  k5.replicates = 100;
  k5.seed = 20260808;
  const StudyResult r5 = run_identification_study(k5);

  const double hit_2_200 = cell_at(r2, 200, 200).hit_rate;
  const double hit_2_50 = cell_at(r2, 200, 50).hit_rate;
  const double hit_5_600 = cell_at(r5, 600, 600).hit_rate;
  const double hit_5_300 = cell_at(r5, 600, 300).hit_rate;
  const bool pass = hit_2_200 >= 0.90 && hit_2_50 < hit_2_200 &&
                    hit_5_600 >= 0.80 && hit_5_600 > hit_5_300;
  report(5, "support recovery rates", pass,
         "two components: " + fmt(hit_2_200) + " at n=200, " + fmt(hit_2_50) +
             " at n=50; five components: " + fmt(hit_5_600) + " at n=600, " +
             fmt(hit_5_300) + " at n=300");
}

// --------------------------------------------------------------- criterion 6

void separation_study() {
  StudyConfig config;
  config.k_star = 2;
  config.m_grid = {25};
  config.n_grid = {100};
  config.replicates = 100;
  config.seed = 20260808;
  config.separation_grid = {4.0, 3.0, 2.0, 1.0, 0.5};
  const StudyResult r = run_separation_study(config);

  int inversions = 0;
  double worst_inversion = 0.0;
  for (size_t i = 1; i < r.cells.size(); ++i) {
    const double rise = r.cells[i].hit_rate - r.cells[i - 1].hit_rate;
    if (rise > 0.0) {
      ++inversions;
      worst_inversion = std::max(worst_inversion, rise);
    }
  }
  const double hit_tight = r.cells.back().hit_rate;
  const double med4 = r.cells.front().median_l2;
  const double med1 = r.cells[3].median_l2;
  const bool pass = inversions <= 1 && worst_inversion <= 0.05 && hit_tight <= 0.10 &&
                    med1 < 3.0 * med4;
  std::ostringstream hits;
  for (const auto& c : r.cells) hits << fmt(c.hit_rate) << " ";
  report(6, "separation sweep", pass,
         "hit rates {" + hits.str() + "} (monotone, last <= 0.10), median ratio " +
             fmt(med1 / med4) + " (need < 3)");
}

// --------------------------------------------------------------- criterion 7

void gbm_efficiency() {
  const Dictionary dict = Dictionary::gaussian_equispaced(4.0, 200, 1.0);
  const MixtureTruth truth =
      make_mixture_truth(dict, {0, 1}, Eigen::VectorXd::Constant(2, 0.5));
  const SolverSettings settings;
  bool pass = true;
  std::ostringstream detail;
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const SampleSet sample = sample_mixture(truth, dict, 200, seed);
    const EmpiricalMoments mom = dict.empirical_moments(sample);
    const TuningPath path = gbm_path(mom, dict.gram(), settings);

    const long grid_calls = 1000;
    std::set<int> grid_ks;
    for (long i = 0; i < grid_calls; ++i) {
      const double w = path.w0 * static_cast<double>(i) / (grid_calls - 1);
      grid_ks.insert(n_hat(w, mom, dict.gram(), settings).count);
    }
    bool covers = true;
    for (int k : grid_ks) {
      if (!path.penalty_for_size.count(k)) covers = false;
    }
    bool verifies = true;
    for (const auto& [k, w] : path.penalty_for_size) {
      if (n_hat(w, mom, dict.gram(), settings).count != k) verifies = false;
    }
    if (path.fit_count > grid_calls / 10 || !covers || !verifies) pass = false;
    detail << path.fit_count << (covers && verifies ? "" : "!") << " ";
  }
  report(7, "bisection path efficiency", pass,
         "solver calls per path {" + detail.str() + "} vs 1000 grid calls (limit 100)");
}

// --------------------------------------------------------------- criterion 8

struct HaarTruth {
  Eigen::VectorXd lambda_star;
  std::vector<double> cell_prob;
  int cells = 0;
};

HaarTruth make_haar_truth(const Dictionary& dict) {
  HaarTruth truth;
  truth.lambda_star = Eigen::VectorXd::Zero(dict.size());
  auto index_of = [&](int l, int k) {
    for (int j = 0; j < dict.size(); ++j) {
      const auto& atom = dict.haar_atoms()[static_cast<size_t>(j)];
      if (atom.level == l && atom.position == k) return j;
    }
    throw std::logic_error("haar atom not found");
  };
  truth.lambda_star(index_of(-1, 0)) = 1.0;
  truth.lambda_star(index_of(0, 0)) = 0.25;
  truth.lambda_star(index_of(1, 1)) = 0.2;
  truth.lambda_star(index_of(2, 0)) = 0.15;
  truth.lambda_star(index_of(3, 5)) = 0.1;

  truth.cells = 16;  // finest truth level is 3
  truth.cell_prob.assign(static_cast<size_t>(truth.cells), 0.0);
  for (int c = 0; c < truth.cells; ++c) {
    const double x = (c + 0.5) / truth.cells;
    double density = 0.0;
    for (int j = 0; j < dict.size(); ++j) {
      if (truth.lambda_star(j) != 0.0) {
        density += truth.lambda_star(j) * dict.evaluate1d(j, x);
      }
    }
    if (density <= 0.0) throw std::logic_error("haar truth is not a density");
    truth.cell_prob[static_cast<size_t>(c)] = density / truth.cells;
  }
  return truth;
}

SampleSet sample_haar_truth(const HaarTruth& truth, long n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd pts(n, 1);
  for (long i = 0; i < n; ++i) {
    const auto c = rng.categorical(truth.cell_prob);
    pts(i, 0) = (static_cast<double>(c) + rng.uniform()) / truth.cells;
  }
  return SampleSet(std::move(pts));
}

void oracle_inequality_event() {
  const long n = 500;
  const double delta = 0.1;
  const double alpha = std::sqrt(2.0);
  const Dictionary dict = Dictionary::haar_for_sample_size(n);
  const HaarTruth truth = make_haar_truth(dict);

  const int reps = 200;
  int held = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const SampleSet sample = sample_haar_truth(truth, n, mix_seed(1008, rep));
    const EmpiricalMoments mom = dict.empirical_moments(sample);
    const WeightSpec w = make_weights(dict, mom, n, delta, WeightVariant::simple);
    const SpadesFit fit = solve(mom, dict.gram(), w, SolverSettings{});
    const double lhs =
        l2_error_in_span(fit.lambda, truth.lambda_star, dict.gram()) +
        alpha / (alpha - 1.0) *
            w.omega.dot((fit.lambda - truth.lambda_star).cwiseAbs());
    const double rhs = oracle_bound(OracleVariant::positive_definite,
                                    truth.lambda_star, truth.lambda_star, dict.gram(),
                                    w, n, delta, alpha);
    if (lhs <= rhs) ++held;
  }
  report(8, "oracle inequality event", held >= 180,
         "held " + std::to_string(held) + "/200 (need 180)");
}

// --------------------------------------------------------------- criterion 9

void l1_recovery_event() {
  const Dictionary dict = Dictionary::gaussian_equispaced(4.0, 50, 1.0);
  const MixtureTruth truth =
      make_mixture_truth(dict, {0, 1}, Eigen::VectorXd::Constant(2, 0.5));
  const Eigen::VectorXd star = truth.full_vector(dict.size());
  const long n = 400;
  const double delta = 0.1;
  const double bound = mixture_l1_bound(2, mixture_envelope(dict), dict.size(), n, delta);

  const int reps = 200;
  int held = 0;
  double worst = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const SampleSet sample = sample_mixture(truth, dict, n, mix_seed(1009, rep));
    const EmpiricalMoments mom = dict.empirical_moments(sample);
    const WeightSpec w = make_weights(dict, mom, n, delta, WeightVariant::mixture);
    const SpadesFit fit = solve(mom, dict.gram(), w, SolverSettings{});
    const double l1 = (fit.lambda - star).cwiseAbs().sum();
    worst = std::max(worst, l1);
    if (l1 <= bound) ++held;
  }
  report(9, "l1 recovery bound", held >= 198,
         "held " + std::to_string(held) + "/200 (need 198), worst " + fmt(worst) +
             " vs bound " + fmt(bound));
}

// -------------------------------------------------------------- criterion 10

void circle_study() {
  CircleConfig config;
  config.seed = 20260808;
  const CircleResult result = run_circle_study(config);

  const bool centers_ok = result.centers >= 200 && result.centers <= 300;
  bool nonnegative = true;
  double first = -1.0, at80 = -1.0;
  for (const auto& [k, w, excess] : result.curve) {
    (void)w;
    if (excess < 0.0) nonnegative = false;
    if (first < 0.0 && k >= 1) first = excess;
    if (k <= 80) at80 = excess;
  }
  const double ratio = at80 / first;
  const bool flat_ok = ratio < 0.01;
  report(10, "thick-circle approximation", centers_ok && nonnegative && flat_ok,
         "centers " + std::to_string(result.centers) +
             " (need 200..300), curve nonnegative " + (nonnegative ? "yes" : "no") +
             ", residual ratio at k=80 " + fmt(ratio) + " (need < 0.01)");
}

// -------------------------------------------------------------- criterion 11

void determinism() {
  StudyConfig small;
  small.k_star = 2;
  small.spacing = 4.0;
  small.m_grid = {10};
  small.n_grid = {60};
  small.replicates = 5;
  small.folds = 5;
  small.seed = 123;
  const std::string a = study_csv(run_identification_study(small));
  const std::string b = study_csv(run_identification_study(small));

  CircleConfig circle;
  circle.n = 300;
  circle.seed = 123;
  const std::string c = circle_csv(run_circle_study(circle));
  const std::string d = circle_csv(run_circle_study(circle));

  StudyConfig sep = small;
  sep.separation_grid = {4.0, 2.0};
  const std::string e = study_csv(run_separation_study(sep));
  const std::string f = study_csv(run_separation_study(sep));

  report(11, "seeded reruns are byte-identical", a == b && c == d && e == f,
         "identification, separation and circle outputs compared");
}

}  // namespace

int main() {
  soft_threshold_equivalence();
  reference_minimizer_equivalence();
  gram_against_quadrature();
  identification_studies();
  separation_study();
  gbm_efficiency();
  oracle_inequality_event();
  l1_recovery_event();
  circle_study();
  determinism();
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  }
  return failures;
}
