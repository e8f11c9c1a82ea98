#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "smnae/errors.hpp"
#include "smnae/layer.hpp"

using namespace smnae;
using namespace smnae::testing;

namespace {

// Independent scalar-loop evaluation of the three loss terms.
LossTerms loss_oracle(const SmnaeLayer& layer, const Matrix& x, const ClassPartition& part,
                      const Laplacian& lap, const TrainConfig& cfg) {
  const std::size_t d = x.rows(), n = x.cols(), h = layer.w_enc.rows();
  Matrix hid(h, n);
  for (std::size_t i = 0; i < h; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += layer.w_enc(i, k) * x(k, j);
      hid(i, j) = 1.0 / (1.0 + std::exp(-acc));
    }
  LossTerms t;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < h; ++k) acc += layer.w_dec(i, k) * hid(k, j);
      const double rec = 1.0 / (1.0 + std::exp(-acc));
      t.j1 += (x(i, j) - rec) * (x(i, j) - rec);
    }
  for (const auto& batch : part.batches) {
    double sum_p = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < batch.cols(); ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += layer.w_enc(i, k) * batch(k, j);
        row += acc * acc;
      }
      sum_p += std::pow(std::sqrt(row), cfg.p);
    }
    t.j2 += (sum_p > 0.0) ? std::pow(sum_p, 1.0 / cfg.p) : 0.0;
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double dot = 0.0;
      for (std::size_t k = 0; k < h; ++k) dot += hid(k, a) * hid(k, b);
      t.j3 += dot * lap.l(b, a);
    }
  t.total = t.j1 + cfg.lambda * t.j2 + cfg.beta * t.j3;
  return t;
}

struct Instance {
  Matrix x;
  ClassPartition part;
  Laplacian lap;
  std::vector<int> labels;
};

Instance make_instance(std::size_t d, std::size_t n, Seed seed) {
  Instance inst;
  inst.x = random_matrix(d, n, seed, 0.0, 1.0);
  inst.labels.resize(n);
  Rng rng(seed.stream(5));
  for (auto& l : inst.labels) l = static_cast<int>(rng.next_u64() % 2);
  inst.part = ClassPartition::from_labels(inst.x, inst.labels);
  inst.lap = build_laplacian(build_supervision_matrix(inst.labels));
  return inst;
}

}  // namespace

TEST_CASE("supervision matrix cases") {
  const SupervisionMatrix same = build_supervision_matrix({4, 4});
  CHECK(same.m == Matrix{{1, 1}, {1, 1}});

  const SupervisionMatrix diff = build_supervision_matrix({1, 2});
  CHECK(diff.m == Matrix{{1, -1}, {-1, 1}});

  const SupervisionMatrix mixed = build_supervision_matrix({0, 0, 1});
  CHECK(mixed.m == Matrix{{1, 1, -1}, {1, 1, -1}, {-1, -1, 1}});

  // Unknown labels contribute zeros off the diagonal.
  const SupervisionMatrix unk = build_supervision_matrix({0, -1});
  CHECK(unk.m == Matrix{{1, 0}, {0, 1}});
}

TEST_CASE("laplacian construction and zero row sums") {
  const Laplacian l1 = build_laplacian(SupervisionMatrix{Matrix{{1, 1}, {1, 1}}});
  CHECK(l1.l == Matrix{{1, -1}, {-1, 1}});

  const Laplacian l2 = build_laplacian(SupervisionMatrix{Matrix{{1, -1}, {-1, 1}}});
  CHECK(l2.l == Matrix{{-1, 1}, {1, -1}});

  const Laplacian l3 = build_laplacian(build_supervision_matrix({0, 0, 1}));
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 3; ++j) row += l3.l(i, j);
    CHECK(row == 0.0);
  }
  // Row-sum oracle: degree minus full row of M.
  const SupervisionMatrix m3 = build_supervision_matrix({0, 0, 1});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double deg = 0.0;
      for (std::size_t k = 0; k < 3; ++k) deg += m3.m(i, k);
      const double expect = (i == j ? deg : 0.0) - m3.m(i, j);
      CHECK(l3.l(i, j) == expect);
    }
}

TEST_CASE("discrimination term on two-sample instances") {
  const Laplacian same = build_laplacian(build_supervision_matrix({3, 3}));
  const Laplacian diff = build_laplacian(build_supervision_matrix({3, 5}));

  Matrix h{{1, 0}, {0, 1}};
  CHECK(discrimination_term(h, same) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(discrimination_term(h, diff) == doctest::Approx(-2.0).epsilon(1e-12));

  Matrix equal_cols{{0.3, 0.3}, {0.9, 0.9}};
  CHECK(discrimination_term(equal_cols, same) == doctest::Approx(0.0).epsilon(1e-12));

  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix hh = random_matrix(5, 2, Seed{700 + s});
    double dist = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      const double dlt = hh(k, 0) - hh(k, 1);
      dist += dlt * dlt;
    }
    CHECK(discrimination_term(hh, same) == doctest::Approx(dist).epsilon(1e-10));
    CHECK(discrimination_term(hh, diff) == doctest::Approx(-dist).epsilon(1e-10));
  }
}

TEST_CASE("loss reduces to reconstruction when lambda = beta = 0") {
  Instance inst = make_instance(5, 6, Seed{30});
  TrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.beta = 0.0;
  const SmnaeLayer layer{init_weights(3, 5, Seed{31}), init_weights(5, 3, Seed{32})};
  const LossTerms t = loss_smnae(layer, inst.x, inst.part, inst.lap, cfg);
  CHECK(t.total == t.j1);
}

TEST_CASE("zero weights reconstruct a 0.5 batch perfectly") {
  Matrix x(4, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.5;
  const std::vector<int> labels{0, 0, 1};
  const SmnaeLayer layer{Matrix(2, 4), Matrix(4, 2)};
  TrainConfig cfg;
  const LossTerms t = loss_smnae(layer, x, ClassPartition::from_labels(x, labels),
                                 build_laplacian(build_supervision_matrix(labels)), cfg);
  CHECK(t.j1 == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("loss matches the term-by-term oracle") {
  Instance inst = make_instance(6, 7, Seed{33});
  TrainConfig cfg;
  cfg.lambda = 0.37;
  cfg.beta = 0.21;
  cfg.p = 0.8;
  const SmnaeLayer layer{init_weights(4, 6, Seed{34}), init_weights(6, 4, Seed{35})};
  const LossTerms got = loss_smnae(layer, inst.x, inst.part, inst.lap, cfg);
  const LossTerms want = loss_oracle(layer, inst.x, inst.part, inst.lap, cfg);
  CHECK(got.j1 == doctest::Approx(want.j1).epsilon(1e-10));
  CHECK(got.j2 == doctest::Approx(want.j2).epsilon(1e-10));
  CHECK(got.j3 == doctest::Approx(want.j3).epsilon(1e-10));
  CHECK(got.total == doctest::Approx(want.total).epsilon(1e-10));
}

TEST_CASE("loss rejects NaN") {
  Instance inst = make_instance(3, 4, Seed{36});
  SmnaeLayer layer{init_weights(2, 3, Seed{37}), init_weights(3, 2, Seed{38})};
  layer.w_enc(0, 0) = std::nan("");
  TrainConfig cfg;
  CHECK_THROWS_AS(loss_smnae(layer, inst.x, inst.part, inst.lap, cfg), NumericalError);
}

TEST_CASE("smooth gradient matches central finite differences") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    Instance inst = make_instance(6, 8, Seed{40 + s});
    SmnaeLayer layer{init_weights(4, 6, Seed{50 + s}), init_weights(6, 4, Seed{60 + s})};
    const double beta = (s % 2) ? 0.5 : 0.0;

    TrainConfig cfg;
    cfg.lambda = 0.0;  // smooth part only
    cfg.beta = beta;

    const SmoothGradients g = grad_smooth(layer, inst.x, inst.lap, beta);
    const double step = 1e-5;
    double worst = 0.0;

    auto loss_at = [&]() {
      return loss_smnae(layer, inst.x, inst.part, inst.lap, cfg).total;
    };
    for (Matrix* w : {&layer.w_enc, &layer.w_dec}) {
      const Matrix& grad = (w == &layer.w_enc) ? g.w_enc : g.w_dec;
      for (std::size_t i = 0; i < w->size(); ++i) {
        const double keep = w->data()[i];
        w->data()[i] = keep + step;
        const double up = loss_at();
        w->data()[i] = keep - step;
        const double down = loss_at();
        w->data()[i] = keep;
        const double fd = (up - down) / (2.0 * step);
        const double rel = std::abs(fd - grad.data()[i]) /
                           std::max({1.0, std::abs(fd), std::abs(grad.data()[i])});
        worst = std::max(worst, rel);
      }
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("perfect reconstruction with beta 0 kills the decoder gradient") {
  Matrix x(4, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 0.5;
  const std::vector<int> labels{0, 1, 1};
  const Laplacian lap = build_laplacian(build_supervision_matrix(labels));
  const SmnaeLayer layer{Matrix(2, 4), Matrix(4, 2)};
  const SmoothGradients g = grad_smooth(layer, x, lap, 0.0);
  CHECK(frobenius_sq(g.w_dec) == 0.0);
}

TEST_CASE("encoder gradient is linear in beta") {
  Instance inst = make_instance(5, 6, Seed{70});
  const SmnaeLayer layer{init_weights(3, 5, Seed{71}), init_weights(5, 3, Seed{72})};
  const SmoothGradients g0 = grad_smooth(layer, inst.x, inst.lap, 0.0);
  const SmoothGradients g1 = grad_smooth(layer, inst.x, inst.lap, 0.4);
  const SmoothGradients g2 = grad_smooth(layer, inst.x, inst.lap, 0.8);
  const Matrix d1 = g1.w_enc - g0.w_enc;
  const Matrix d2 = g2.w_enc - g0.w_enc;
  CHECK(max_abs_diff(2.0 * Matrix(d1), d2) < 1e-10);
}

TEST_CASE("plain autoencoder training decreases loss over early epochs") {
  Instance inst = make_instance(8, 10, Seed{80});
  TrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.beta = 0.0;
  cfg.max_epochs = 10;
  cfg.seed = Seed{81};
  const TrainResult r = train_layer(inst.x, inst.part, inst.lap, 4, cfg);
  REQUIRE(r.trace.size() >= 2);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].total < r.trace[k - 1].total);
  }
}

TEST_CASE("training reaches 90% of the initial loss on a small two-class set") {
  Instance inst = make_instance(16, 20, Seed{82});
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.seed = Seed{83};
  const TrainResult r = train_layer(inst.x, inst.part, inst.lap, 8, cfg);
  CHECK(r.trace.back().total <= 0.9 * r.trace.front().total);
}

TEST_CASE("training trace is non-increasing and NaN input raises") {
  Instance inst = make_instance(6, 8, Seed{84});
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.seed = Seed{85};
  const TrainResult r = train_layer(inst.x, inst.part, inst.lap, 3, cfg);
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    CHECK(r.trace[k].total <= r.trace[k - 1].total);

  Instance bad = make_instance(4, 4, Seed{86});
  bad.x(0, 0) = std::nan("");
  bad.part = ClassPartition::from_labels(bad.x, bad.labels);
  CHECK_THROWS_WITH_AS(train_layer(bad.x, bad.part, bad.lap, 2, cfg),
                       doctest::Contains("epoch 0"), NumericalError);
}

TEST_CASE("large lambda shrinks the class group norms") {
  Instance inst = make_instance(12, 14, Seed{87});
  TrainConfig base;
  base.lambda = 0.0;
  base.beta = 0.0;
  base.max_epochs = 50;
  base.seed = Seed{88};
  TrainConfig strong = base;
  strong.lambda = 1.0;

  const TrainResult weak = train_layer(inst.x, inst.part, inst.lap, 6, base);
  const TrainResult sparse = train_layer(inst.x, inst.part, inst.lap, 6, strong);

  auto group_l21 = [&](const SmnaeLayer& layer) {
    double acc = 0.0;
    for (const auto& batch : inst.part.batches) acc += l2p_norm(matmul(layer.w_enc, batch), 1.0);
    return acc;
  };
  CHECK(group_l21(sparse.layer) <= 0.5 * group_l21(weak.layer));
}

TEST_CASE("encode basics") {
  const SmnaeLayer zero{Matrix(3, 4), Matrix(4, 3)};
  const Matrix x = random_matrix(4, 5, Seed{90});
  const Matrix h = encode(zero, x);
  CHECK(h.rows() == 3);
  CHECK(h.cols() == 5);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(h.data()[i] == 0.5);

  const SmnaeLayer layer{init_weights(3, 4, Seed{91}), init_weights(4, 3, Seed{92})};
  const Matrix one_col = encode(layer, x.column(2));
  CHECK(one_col.cols() == 1);

  CHECK(max_abs_diff(encode(layer, x), sigmoid(matmul(layer.w_enc, x))) < 1e-12);
  CHECK_THROWS_AS(encode(layer, random_matrix(5, 2, Seed{93})), ValidationError);
}

TEST_CASE("encoding commutes with column permutation") {
  const SmnaeLayer layer{init_weights(3, 4, Seed{94}), init_weights(4, 3, Seed{95})};
  const Matrix x = random_matrix(4, 6, Seed{96});
  Matrix permuted(4, 6);
  const std::size_t perm[6] = {3, 1, 5, 0, 2, 4};
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t r = 0; r < 4; ++r) permuted(r, c) = x(r, perm[c]);

  const Matrix h = encode(layer, x);
  const Matrix hp = encode(layer, permuted);
  for (std::size_t c = 0; c < 6; ++c)
    for (std::size_t r = 0; r < 3; ++r) CHECK(hp(r, c) == h(r, perm[c]));
}

TEST_CASE("stacked training: single layer equals train_layer, greedy prefix is stable") {
  Instance inst = make_instance(8, 10, Seed{97});
  TrainConfig cfg;
  cfg.max_epochs = 20;
  cfg.seed = Seed{98};

  const TrainResult single = train_layer(inst.x, inst.part, inst.lap, 5, cfg);
  const StackResult one = train_stacked(inst.x, inst.part, inst.lap, {5}, cfg);
  CHECK(one.stack.layers.size() == 1);
  CHECK(one.stack.layers[0].w_enc == single.layer.w_enc);
  CHECK(one.stack.layers[0].w_dec == single.layer.w_dec);

  const StackResult two = train_stacked(inst.x, inst.part, inst.lap, {5, 3}, cfg);
  CHECK(two.stack.layers[0].w_enc == single.layer.w_enc);
  CHECK(two.stack.output_dim() == 3);
  CHECK(encode(two.stack, inst.x).rows() == 3);
}

TEST_CASE("trace CSV export round-trips its values") {
  std::vector<TraceRow> trace{{0, 1.5, 1.0, 0.3, 0.2, 0.0}, {1, 1.2, 0.9, 0.2, 0.1, 0.05}};
  std::ostringstream out;
  write_trace_csv(out, trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,total,j1,j2,j3,step");
  for (const auto& row : trace) {
    REQUIRE(std::getline(in, line));
    double vals[6];
    CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &vals[0], &vals[1], &vals[2],
                      &vals[3], &vals[4], &vals[5]) == 6);
    CHECK(vals[0] == static_cast<double>(row.epoch));
    CHECK(vals[1] == row.total);
    CHECK(vals[2] == row.j1);
    CHECK(vals[3] == row.j2);
    CHECK(vals[4] == row.j3);
    CHECK(vals[5] == row.step);
  }
}
