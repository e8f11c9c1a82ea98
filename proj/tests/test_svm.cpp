#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "smnae/errors.hpp"
#include "smnae/svm.hpp"

using namespace smnae;
using namespace smnae::testing;

namespace {

// Two well-separated clusters in 2-D, n points per class.
void make_clusters(std::size_t n, Matrix& features, std::vector<int>& labels, Seed seed) {
  Rng rng(seed);
  features = Matrix(2, 2 * n);
  labels.resize(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const bool pos = i % 2 == 0;
    features(0, i) = (pos ? 2.0 : -2.0) + 0.3 * rng.normal();
    features(1, i) = (pos ? 2.0 : -2.0) + 0.3 * rng.normal();
    labels[i] = pos ? 1 : -1;
  }
}

}  // namespace

TEST_CASE("rbf kernel values and symmetry") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  CHECK(rbf_kernel(x, x, 0.7) == 1.0);

  const std::vector<double> y{1.0, 2.0, 4.0};  // squared distance 1
  CHECK(rbf_kernel(x, y, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  Rng rng(Seed{3});
  for (int t = 0; t < 10; ++t) {
    std::vector<double> a(4), b(4);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal();
    CHECK(rbf_kernel(a, b, 0.5) == rbf_kernel(b, a, 0.5));
  }

  CHECK_THROWS_AS(rbf_kernel(x, {1.0}, 1.0), ValidationError);
}

TEST_CASE("two separated points are classified with margin") {
  Matrix features(1, 2);
  features(0, 0) = 1.0;
  features(0, 1) = -1.0;
  const std::vector<int> labels{1, -1};
  SvmConfig cfg;
  cfg.c = 10.0;
  cfg.gamma = 1.0;
  const TrainSvmResult r = train_svm(features, labels, cfg);
  CHECK(r.converged);
  CHECK(decision_value(r.model, {1.0}) > 0.0);
  CHECK(decision_value(r.model, {-1.0}) < 0.0);
  CHECK(std::abs(decision_value(r.model, {1.0})) >= 1.0 - cfg.tol);
  CHECK(std::abs(decision_value(r.model, {-1.0})) >= 1.0 - cfg.tol);
}

TEST_CASE("XOR pattern separates with an RBF kernel") {
  Matrix features(2, 4);
  const double pts[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<int> labels{1, 1, -1, -1};
  for (std::size_t i = 0; i < 4; ++i) {
    features(0, i) = pts[i][0];
    features(1, i) = pts[i][1];
  }
  SvmConfig cfg;
  cfg.c = 10.0;
  cfg.gamma = 1.0;
  const TrainSvmResult r = train_svm(features, labels, cfg);
  for (std::size_t i = 0; i < 4; ++i) {
    const double dec = decision_value(r.model, {pts[i][0], pts[i][1]});
    CHECK((dec >= 0 ? 1 : -1) == labels[i]);
  }
}

TEST_CASE("single-class input is rejected") {
  Matrix features(1, 2);
  features(0, 0) = 1.0;
  features(0, 1) = 2.0;
  CHECK_THROWS_AS(train_svm(features, {1, 1}, SvmConfig{}), ValidationError);
}

TEST_CASE("duplicating the training set keeps the decision signs") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(10, features, labels, Seed{5});
  SvmConfig cfg;
  const TrainSvmResult base = train_svm(features, labels, cfg);

  Matrix doubled(2, 2 * features.cols());
  std::vector<int> dlabels;
  for (std::size_t i = 0; i < features.cols(); ++i) {
    for (int copy = 0; copy < 2; ++copy) {
      doubled(0, 2 * i + copy) = features(0, i);
      doubled(1, 2 * i + copy) = features(1, i);
    }
    dlabels.push_back(labels[i]);
    dlabels.push_back(labels[i]);
  }
  const TrainSvmResult dup = train_svm(doubled, dlabels, cfg);

  Rng rng(Seed{6});
  for (int t = 0; t < 40; ++t) {
    const std::vector<double> probe{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double a = decision_value(base.model, probe);
    const double b = decision_value(dup.model, probe);
    if (std::abs(a) > 0.1) CHECK((a >= 0) == (b >= 0));
  }
}

TEST_CASE("decision value equals the explicit kernel sum") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(8, features, labels, Seed{7});
  const TrainSvmResult r = train_svm(features, labels, SvmConfig{});

  const std::vector<double> x{0.4, -1.1};
  double expect = r.model.bias;
  for (std::size_t i = 0; i < r.model.support_vectors.size(); ++i) {
    double dist = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
      const double d = r.model.support_vectors[i][k] - x[k];
      dist += d * d;
    }
    expect += r.model.alphas[i] * std::exp(-r.model.gamma * dist);
  }
  CHECK(decision_value(r.model, x) == doctest::Approx(expect).epsilon(1e-12));

  // Batch evaluation agrees with the per-sample route.
  Matrix probes(2, 3);
  Rng rng(Seed{8});
  for (std::size_t i = 0; i < probes.size(); ++i) probes.data()[i] = rng.normal();
  const std::vector<double> batch = decision_values(r.model, probes);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(batch[c] ==
          doctest::Approx(decision_value(r.model, {probes(0, c), probes(1, c)})).epsilon(1e-9));
  }
}

TEST_CASE("zero-alpha model returns its bias") {
  SvmModel model;
  model.bias = 0.37;
  CHECK(decision_value(model, {}) == 0.37);
}

TEST_CASE("signed alphas sum to zero") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(12, features, labels, Seed{9});
  const TrainSvmResult r = train_svm(features, labels, SvmConfig{});
  double sum = 0.0;
  for (double a : r.model.alphas) sum += a;
  CHECK(std::abs(sum) < 1e-3);
}

TEST_CASE("dual objective trace is non-decreasing") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(15, features, labels, Seed{10});
  const TrainSvmResult r = train_svm(features, labels, SvmConfig{});
  REQUIRE(r.dual_trace.size() >= 2);
  for (std::size_t k = 1; k < r.dual_trace.size(); ++k) {
    CHECK(r.dual_trace[k] >= r.dual_trace[k - 1] - 1e-12);
  }
}

TEST_CASE("platt probabilities behave") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(20, features, labels, Seed{11});
  const TrainSvmResult r = train_svm(features, labels, SvmConfig{});
  REQUIRE(r.model.platt_fitted);

  // Balanced symmetric data: probability near 0.5 at decision value 0.
  CHECK(std::abs(proba_from_decision(r.model, 0.0) - 0.5) < 0.05);

  // Monotone in the decision value.
  double prev = proba_from_decision(r.model, -5.0);
  for (double dec = -4.5; dec <= 5.0; dec += 0.5) {
    const double p = proba_from_decision(r.model, dec);
    CHECK(p >= prev);
    prev = p;
  }

  // Saturation.
  CHECK(proba_from_decision(r.model, 50.0) > 1.0 - 1e-6);
  CHECK(proba_from_decision(r.model, -50.0) < 1e-6);

  SvmModel unfitted = r.model;
  unfitted.platt_fitted = false;
  CHECK_THROWS_AS(predict_proba(unfitted, {0.0, 0.0}), ValidationError);
}

TEST_CASE("training is deterministic") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(10, features, labels, Seed{12});
  const TrainSvmResult a = train_svm(features, labels, SvmConfig{});
  const TrainSvmResult b = train_svm(features, labels, SvmConfig{});
  REQUIRE(a.model.alphas.size() == b.model.alphas.size());
  for (std::size_t i = 0; i < a.model.alphas.size(); ++i)
    CHECK(a.model.alphas[i] == b.model.alphas[i]);
  CHECK(a.model.bias == b.model.bias);
  CHECK(a.model.platt_a == b.model.platt_a);
}

TEST_CASE("grid search picks usable hyperparameters") {
  Matrix features;
  std::vector<int> labels;
  make_clusters(12, features, labels, Seed{13});
  SvmConfig cfg;
  cfg.grid_search = true;
  const TrainSvmResult r = train_svm(features, labels, cfg);
  std::size_t hits = 0;
  const std::vector<double> dec = decision_values(r.model, features);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if ((dec[i] >= 0 ? 1 : -1) == labels[i]) ++hits;
  CHECK(hits >= labels.size() - 1);
}
