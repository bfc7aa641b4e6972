#include "test_support.hpp"

#include "tbm/baselines.hpp"

#include <doctest.h>

#include <cmath>

using namespace tbm;
using tbm::test::random_matrix;
using tbm::test::random_tensor;

TEST_SUITE("baselines") {
  TEST_CASE("HOOI on an exact Tucker tensor") {
    Random rng(51);
    const DenseTensor core = random_tensor(Shape{2, 3, 2}, rng);
    const Matrix a = random_matrix(7, 2, rng), b = random_matrix(6, 3, rng), c = random_matrix(5, 2, rng);
    const DenseTensor y = multi_product(core, {{0, a}, {1, b}, {2, c}});
    const auto out = hooi_estimate(y, {2, 3, 2});
    CHECK(frobenius(out.estimate - y) <= 1e-8 * frobenius(y));
    for (const auto& u : out.factors) CHECK(orthonormality_error(u.matrix()) <= 1e-10);
  }

  TEST_CASE("HOOI residuals never increase") {
    Random rng(52);
    for (int t = 0; t < 10; ++t) {
      const DenseTensor y = random_tensor(Shape{8, 7, 6}, rng);
      const auto out = hooi_estimate(y, {3, 2, 2}, HooiConfig{25, 0.0});
      REQUIRE(!out.residuals.empty());
      for (std::size_t s = 1; s < out.residuals.size(); ++s) CHECK(out.residuals[s] <= out.residuals[s - 1] + 1e-10);
      CHECK(out.residuals.back() == doctest::Approx(frobenius(y - out.estimate)).epsilon(1e-10));
    }
    CHECK_THROWS(hooi_estimate(random_tensor(Shape{3, 3}, rng), {2, 2}, HooiConfig{0, 1e-8}));
  }

  TEST_CASE("HOSVD clustering recovers a noiseless block tensor") {
    const auto m = random_instance(InstanceSpec{{12, 10, 8}, {3, 2, 2}, 0.0, 1.0, std::nullopt}, 53);
    const auto labels = hosvd_cluster(synthesize_signal(m), {3, 2, 2}, {}, 1);
    for (std::size_t k = 0; k < 3; ++k) CHECK(misclassification_rate(labels[k], m.labels[k]).rate == 0.0);
  }

  TEST_CASE("contamination") {
    const Labels truth = labels_from_sizes({10, 10, 10});
    Random a(54), b(54);
    const Labels ca = contaminate(truth, 0.3, a);
    CHECK(ca == contaminate(truth, 0.3, b));
    std::size_t changed = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) changed += ca[j] != truth[j] ? 1 : 0;
    CHECK(changed <= 9);
    CHECK(ca.clusters() == 3);
    CHECK(contaminate(truth, 0.0, a) == truth);
    CHECK_THROWS(contaminate(truth, 1.0, a));
    CHECK_THROWS(contaminate(truth, -0.1, a));
  }

  TEST_CASE("oracle recovers the truth at high SNR and is deterministic") {
    auto m = random_instance(InstanceSpec{{25, 25, 25}, {3, 3, 3}, 1.0, 4.0, std::nullopt}, 55);
    const auto y = sample(m, 56);
    const auto out = oracle_estimate(y, m.labels, OracleConfig{0.3, 57});
    for (std::size_t k = 0; k < 3; ++k) CHECK(misclassification_rate(out.labels[k], m.labels[k]).rate == 0.0);
    CHECK(oracle_estimate(y, m.labels, OracleConfig{0.3, 57}).labels == out.labels);
    CHECK_THROWS(oracle_estimate(y, m.labels, OracleConfig{1.0, 57}));
  }

  TEST_CASE("exhaustive MLE hand cases") {
    const auto two = brute_force_mle(DenseTensor(Shape{2, 2}, {1, 2, 3, 5}), {2, 1});
    CHECK(two.objective == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(two.labels[0].values() == std::vector<int>{0, 1});
    CHECK(two.labels[1].values() == std::vector<int>{0, 0});
    CHECK(two.core == DenseTensor(Shape{2, 1}, {1.5, 4}));

    const DenseTensor y(Shape{3, 3}, {1, 2, 0.5, 3, 7, 2.5, 1.5, 2.5, 0});
    const auto three = brute_force_mle(y, {2, 2});
    CHECK(three.objective == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(three.labels[0].values() == std::vector<int>{0, 1, 0});
    CHECK(three.labels[1].values() == std::vector<int>{0, 1, 0});
    CHECK(three.objective == doctest::Approx(objective(y, three.core, three.labels)).epsilon(1e-14));

    CHECK_THROWS(brute_force_mle(DenseTensor(Shape{30, 30}), {2, 2}));
  }

  TEST_CASE("exhaustive MLE is never beaten by HLloyd") {
    Random rng(58);
    for (std::uint64_t t = 0; t < 10; ++t) {
      const DenseTensor y = random_tensor(Shape{5, 4, 3}, rng);
      const auto mle = brute_force_mle(y, {2, 2, 2});
      const auto init = hsc(y, HscConfig{{2, 2, 2}, {}, t});
      const auto refined = hlloyd(y, init).labels;
      const double obj = objective(y, block_mean_estimate(y, refined).core, refined);
      CHECK(mle.objective <= obj + 1e-10);
    }
  }
}
