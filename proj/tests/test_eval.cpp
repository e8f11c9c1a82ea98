#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "smnae/errors.hpp"
#include "smnae/eval.hpp"

using namespace smnae;
using namespace smnae::testing;

namespace {

// O(n^2) oracle: recount FAR/FRR at every distinct threshold by looping over
// all samples, then interpolate the crossing exactly like the spec of the
// metric demands.
double eer_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(thresholds.back() + 1.0);

  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;

  std::vector<std::pair<double, double>> points;  // (far, frr)
  for (double t : thresholds) {
    std::size_t fa = 0, fr = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (labels[i] && scores[i] < t) ++fr;
      if (!labels[i] && scores[i] >= t) ++fa;
    }
    points.emplace_back(static_cast<double>(fa) / n_neg, static_cast<double>(fr) / n_pos);
  }

  std::size_t k = 0;
  while (k + 1 < points.size() && points[k + 1].first - points[k + 1].second > 0.0) ++k;
  const double d0 = points[k].first - points[k].second;
  const double d1 = points[k + 1].first - points[k + 1].second;
  double s = 0.0;
  if (d0 > d1) s = d0 / (d0 - d1);
  return points[k].first + s * (points[k + 1].first - points[k].first);
}

}  // namespace

TEST_CASE("perfect separation gives EER 0") {
  const EvalResult r = compute_eer({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  CHECK(r.eer == doctest::Approx(0.0));
  CHECK(r.accuracy_pct == doctest::Approx(100.0));
  CHECK(r.n_pos == 2);
  CHECK(r.n_neg == 2);
}

TEST_CASE("identical scores give EER 0.5") {
  const std::vector<double> scores(8, 0.42);
  const std::vector<int> labels{1, 0, 0, 1, 1, 0, 1, 0};
  const EvalResult r = compute_eer(scores, labels);
  CHECK(r.eer == doctest::Approx(0.5));
  CHECK(r.eer == doctest::Approx(eer_oracle(scores, labels)));
}

TEST_CASE("one swapped pair crosses at 0.5") {
  const EvalResult r = compute_eer({0.9, 0.8, 0.4, 0.1}, {1, 0, 1, 0});
  CHECK(r.eer == doctest::Approx(0.5));
}

TEST_CASE("roc endpoints") {
  const std::vector<double> scores{0.7, 0.6, 0.3, 0.2};
  const std::vector<int> labels{1, 0, 1, 0};
  const auto roc = roc_points(scores, labels);
  REQUIRE(roc.size() == 5);

  // Lowest threshold accepts everything.
  CHECK(roc.front().far == 1.0);
  CHECK(roc.front().frr == 0.0);
  // Sentinel above the maximum rejects everything.
  CHECK(roc.back().far == 0.0);
  CHECK(roc.back().frr == 1.0);
  CHECK(roc.back().threshold > 0.7);

  for (std::size_t k = 1; k < roc.size(); ++k) {
    CHECK(roc[k].threshold > roc[k - 1].threshold);
    CHECK(roc[k].far <= roc[k - 1].far);
    CHECK(roc[k].frr >= roc[k - 1].frr);
  }
}

TEST_CASE("roc matches a counting oracle on a random instance") {
  Rng rng(Seed{44});
  std::vector<double> scores(20);
  std::vector<int> labels(20);
  for (std::size_t i = 0; i < 20; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<int>(rng.next_u64() % 2);
  }
  labels[0] = 1;
  labels[1] = 0;

  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg)++;
  for (const auto& pt : roc_points(scores, labels)) {
    std::size_t fa = 0, fr = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      if (labels[i] && scores[i] < pt.threshold) ++fr;
      if (!labels[i] && scores[i] >= pt.threshold) ++fa;
    }
    CHECK(pt.far == static_cast<double>(fa) / n_neg);
    CHECK(pt.frr == static_cast<double>(fr) / n_pos);
  }
}

TEST_CASE("compute_eer agrees exactly with the brute-force sweep") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(Seed{1000 + s});
    const std::size_t n = 10 + static_cast<std::size_t>(rng.next_u64() % 60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      labels[i] = static_cast<int>(rng.next_u64() % 2);
    }
    labels[0] = 1;
    labels[1] = 0;
    // Duplicated scores exercise tie handling.
    if (n > 4) scores[3] = scores[2];

    const EvalResult r = compute_eer(scores, labels);
    CHECK(r.eer == eer_oracle(scores, labels));
    CHECK(r.accuracy_pct == 100.0 * (1.0 - r.eer));
  }
}

TEST_CASE("EER is invariant under strictly increasing transforms") {
  Rng rng(Seed{45});
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (std::size_t i = 0; i < 30; ++i) {
    scores[i] = rng.uniform(-2.0, 2.0);
    labels[i] = static_cast<int>(rng.next_u64() % 2);
  }
  labels[0] = 1;
  labels[1] = 0;

  const double base = compute_eer(scores, labels).eer;
  std::vector<double> warped = scores;
  for (double& v : warped) v = std::tanh(v) * 3.0 + v * 0.001;
  CHECK(compute_eer(warped, labels).eer == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(compute_eer({0.5, 0.6}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(compute_eer({}, {}), ValidationError);
}
