#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "spades/rng.hpp"
#include "spades/theory.hpp"

using namespace spades;

namespace {

GaussianAtom atom1d(double mean, double tau) {
  GaussianAtom a;
  a.mean = Eigen::VectorXd::Constant(1, mean);
  a.tau = tau;
  return a;
}

}  // namespace

TEST_CASE("coherence report on an orthonormal dictionary") {
  const Dictionary haar = Dictionary::haar(3);
  const int m = haar.size();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  lambda(0) = 1.0;
  lambda(3) = -0.5;
  const WeightSpec w = scalar_weights(0.2, m);
  const CoherenceReport rep = coherence_report(haar.gram(), lambda, w, 0.1, 100);
  CHECK(rep.max_coherence == 0.0);
  CHECK(rep.cumulative_coherence == 0.0);
  CHECK(rep.sparsity_index == 0);
  CHECK(rep.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(rep.active_count == 2);
  CHECK(rep.max_coherence_ok);
  CHECK(rep.cumulative_coherence_ok);
  CHECK(rep.sparsity_ok);
  CHECK(rep.positive_definite);
}

TEST_CASE("coherence report for two separated gaussians") {
  const Dictionary dict = Dictionary::gaussian({atom1d(0.0, 1.0), atom1d(4.0, 1.0)});
  Eigen::VectorXd lambda(2);
  lambda << 0.5, 0.5;
  const EmpiricalMoments mom{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 100};
  const WeightSpec w = make_weights(dict, mom, 100, 0.1, WeightVariant::simple);
  const CoherenceReport rep = coherence_report(dict.gram(), lambda, w, 0.1, 100);

  CHECK(rep.max_coherence == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  // with equal sup-norms the ratio product F * G is exactly one, so the
  // condition value is 16 * 2 * exp(-4)
  const double condition_value = 16.0 * rep.norm_weight_ratio *
                                 rep.active_weight_ratio * rep.max_coherence *
                                 rep.active_count;
  CHECK(condition_value == doctest::Approx(32.0 * std::exp(-4.0)).epsilon(1e-10));
  CHECK(condition_value == doctest::Approx(0.586).epsilon(1e-3));
  CHECK(rep.max_coherence_ok);
}

TEST_CASE("empty support conventions") {
  const Dictionary dict = Dictionary::gaussian({atom1d(0.0, 1.0), atom1d(1.0, 1.0)});
  const WeightSpec w = scalar_weights(0.2, 2);
  const CoherenceReport rep =
      coherence_report(dict.gram(), Eigen::VectorXd::Zero(2), w, 0.1, 50);
  CHECK(rep.max_coherence == 0.0);
  CHECK(rep.cumulative_coherence == 0.0);
  CHECK(rep.active_count == 0);
  CHECK(rep.max_coherence_ok);
  CHECK(rep.cumulative_coherence_ok);
  CHECK(rep.sparsity_ok);
}

TEST_CASE("cumulative coherence dominates the counted pairwise maxima") {
  spades::Rng rng(31);
  std::vector<GaussianAtom> atoms;
  for (int j = 0; j < 6; ++j) atoms.push_back(atom1d(rng.uniform(0.0, 6.0), 1.0));
  const Dictionary dict = Dictionary::gaussian(atoms);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(6);
  lambda(1) = 1.0;
  lambda(4) = 2.0;
  const WeightSpec w = scalar_weights(0.2, 6);
  const CoherenceReport rep = coherence_report(dict.gram(), lambda, w, 0.1, 50);
  double counted_max = 0.0;
  for (int i : {1, 4}) {
    for (int j = i + 1; j < 6; ++j) {
      counted_max = std::max(counted_max, std::abs(dict.gram()(i, j)));
    }
  }
  CHECK(rep.cumulative_coherence >= counted_max);
  CHECK(rep.min_eigenvalue <= dict.gram().diagonal().minCoeff() + 1e-12);
}

TEST_CASE("mixture conditions for well separated components") {
  // k* = 2 at spacing 4 with unit scales
  const Dictionary dict = Dictionary::gaussian_equispaced(4.0, 200, 1.0);
  Eigen::VectorXd lambda_star = Eigen::VectorXd::Zero(200);
  lambda_star(0) = 0.5 * dict.density_norm(0);
  lambda_star(1) = 0.5 * dict.density_norm(1);
  const MixtureConditions cond = check_conditions_mixture(dict, lambda_star, 100, 0.1);

  CHECK(cond.true_support_size == 2);
  CHECK(cond.max_coherence == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  CHECK(cond.identifiable);  // exp(-4) < 1/32

  // separation threshold sqrt(4 log 32) ~= 3.7233 and the spacing is 4
  CHECK(std::sqrt(4.0 * std::log(32.0)) == doctest::Approx(3.7233).epsilon(1e-4));
  CHECK(cond.min_separation == doctest::Approx(4.0));
  CHECK(cond.separated);

  CHECK(cond.envelope == doctest::Approx(0.75113).epsilon(1e-4));
  CHECK(cond.rate == doctest::Approx(0.36868).epsilon(2e-4));
  CHECK(cond.noise_threshold == doctest::Approx(2.6744).epsilon(1e-3));
  // the theoretical threshold is conservative: equal weights 1/2 sit below it
  CHECK(cond.min_weight == doctest::Approx(0.5 * dict.density_norm(0)));
  CHECK_FALSE(cond.weights_above_noise);
}

TEST_CASE("five equally spaced components satisfy the coherence requirement") {
  const Dictionary dict = Dictionary::gaussian_equispaced(5.0, 20, 1.0);
  Eigen::VectorXd lambda_star = Eigen::VectorXd::Zero(20);
  for (int j = 0; j < 5; ++j) lambda_star(j) = 0.2 * dict.density_norm(j);
  const MixtureConditions cond = check_conditions_mixture(dict, lambda_star, 400, 0.1);
  CHECK(cond.true_support_size == 5);
  CHECK(cond.max_coherence == doctest::Approx(std::exp(-6.25)).epsilon(1e-12));
  CHECK(std::exp(-6.25) == doctest::Approx(0.00193).epsilon(1e-2));
  CHECK(cond.identifiable);  // 0.00193 <= 1/80

  // flags recompute from the stored scalars
  CHECK(cond.identifiable ==
        (cond.max_coherence <= 1.0 / (16.0 * cond.true_support_size)));
  CHECK(cond.weights_above_noise == (cond.min_weight > cond.noise_threshold));
}

TEST_CASE("mixture conditions reject non-gaussian dictionaries and empty truths") {
  const Dictionary haar = Dictionary::haar(2);
  CHECK_THROWS(check_conditions_mixture(haar, Eigen::VectorXd::Ones(haar.size()), 50, 0.1));
  const Dictionary dict = Dictionary::gaussian_equispaced(4.0, 3, 1.0);
  CHECK_THROWS(check_conditions_mixture(dict, Eigen::VectorXd::Zero(3), 50, 0.1));
}

TEST_CASE("oracle bound values and limits") {
  const int m = 10;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd star = Eigen::VectorXd::Zero(m);
  star(0) = 0.3;
  star(1) = -0.2;
  const WeightSpec w = scalar_weights(0.86530, m);

  // positive-definite variant at the truth: only the weight-energy remainder
  const double alpha = std::sqrt(2.0);
  const double bound = oracle_bound(OracleVariant::positive_definite, star, star, id,
                                    w, 100, 0.1, alpha);
  const double expected =
      8.0 * alpha * alpha / (alpha - 1.0) * (2.0 * 0.86530 * 0.86530) / 1.0;
  CHECK(bound == doctest::Approx(expected).epsilon(1e-12));
  CHECK(bound == doctest::Approx(57.844).epsilon(1e-4));

  // empty support, zero error: the bound vanishes
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  CHECK(oracle_bound(OracleVariant::max_coherence, zero, zero, id, w, 100, 0.1, 2.0) ==
        0.0);

  // the leading prefactor approaches one as alpha grows; with an empty
  // reference support the remainder drops out and only the prefactor is left
  const double err = l2_error_in_span(zero, star, id);
  const double huge = oracle_bound(OracleVariant::max_coherence, zero, star, id, w,
                                   100, 0.1, 1e9);
  CHECK(huge == doctest::Approx(err).epsilon(1e-6));
  const double at_two = oracle_bound(OracleVariant::max_coherence, zero, star, id, w,
                                     100, 0.1, 2.0);
  CHECK(at_two == doctest::Approx(3.0 * err).epsilon(1e-12));

  CHECK_THROWS(oracle_bound(OracleVariant::max_coherence, star, star, id, w, 100,
                            0.1, 1.0));
}

TEST_CASE("coherence-variant remainder follows the stated formula") {
  const Dictionary dict = Dictionary::gaussian({atom1d(0.0, 1.0), atom1d(4.0, 1.0)});
  const EmpiricalMoments mom{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 100};
  const WeightSpec w = make_weights(dict, mom, 100, 0.1, WeightVariant::simple);
  Eigen::VectorXd star(2);
  star << 0.4, 0.3;
  const double alpha = 2.0;
  const double r = deviation_rate(2, 100, 0.05);
  const double f = 4.0 * dict.sup_norms()(0);  // unit norms
  const double expected = 8.0 * alpha * alpha / (alpha - 1.0) * f * f * r * r * 2.0;
  const double bound = oracle_bound(OracleVariant::cumulative_coherence, star, star,
                                    dict.gram(), w, 100, 0.1, alpha);
  CHECK(bound == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("mixture l1 bound") {
  const double L = std::pow(M_PI, -0.25);
  const double bound = mixture_l1_bound(2, L, 200, 100, 0.1);
  CHECK(bound == doctest::Approx(5.553).epsilon(1e-3));
  CHECK(mixture_l1_bound(0, L, 200, 100, 0.1) == 0.0);
  CHECK(mixture_l1_bound(6, L, 200, 100, 0.1) ==
        doctest::Approx(3.0 * bound).epsilon(1e-12));
}

TEST_CASE("smallest eigenvalue matches the characteristic-polynomial oracle") {
  spades::Rng rng(32);
  for (int trial = 0; trial < 8; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(5));  // up to 6
    std::vector<GaussianAtom> atoms;
    for (int j = 0; j < m; ++j) {
      atoms.push_back(atom1d(rng.uniform(0.0, 3.0 * m), rng.uniform(0.7, 1.5)));
    }
    const Dictionary dict = Dictionary::gaussian(atoms);
    const double iterative = min_eigenvalue(dict.gram());
    const double reference = oracle::char_poly_min_eigenvalue(dict.gram());
    CHECK(iterative == doctest::Approx(reference).epsilon(1e-8));
  }
}

TEST_CASE("smallest eigenvalue on nearly singular and identity matrices") {
  CHECK(min_eigenvalue(Eigen::MatrixXd::Identity(5, 5)) == doctest::Approx(1.0));
  Eigen::MatrixXd tight(2, 2);
  tight << 1.0, 0.999999, 0.999999, 1.0;
  CHECK(min_eigenvalue(tight) == doctest::Approx(1e-6).epsilon(1e-6));
}

TEST_CASE("reports serialize to json") {
  const Dictionary dict = Dictionary::gaussian_equispaced(4.0, 3, 1.0);
  const WeightSpec w = scalar_weights(0.3, 3);
  const CoherenceReport rep =
      coherence_report(dict.gram(), Eigen::VectorXd::Ones(3), w, 0.1, 50);
  const std::string json_text = to_json(rep);
  CHECK(json_text.find("max_coherence") != std::string::npos);
  CHECK(json_text.find("min_eigenvalue") != std::string::npos);

  Eigen::VectorXd star = Eigen::VectorXd::Zero(3);
  star(0) = 0.5;
  const std::string cond_text = to_json(check_conditions_mixture(dict, star, 50, 0.1));
  CHECK(cond_text.find("identifiable") != std::string::npos);
}
