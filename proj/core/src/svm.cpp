#include "smnae/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "smnae/errors.hpp"

namespace smnae {

namespace {

// Full kernel matrix from a column-per-sample feature matrix, via the Gram
// matrix expansion ||x-y||^2 = ||x||^2 + ||y||^2 - 2 x.y.
Matrix kernel_matrix(const Matrix& features, double gamma) {
  const std::size_t n = features.cols();
  Matrix gram = matmul_tn(features, features);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = gram(i, i);
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k(i, j) = std::exp(-gamma * std::max(0.0, sq[i] + sq[j] - 2.0 * gram(i, j)));
  return k;
}

struct SmoState {
  std::vector<double> alpha;  // in [0, C]
  std::vector<double> u;      // u_i = sum_j alpha_j y_j K_ij (no bias)
  double dual = 0.0;
};

// One SMO run on a precomputed kernel. Returns alphas, bias and the dual
// objective trace.
struct SmoOutput {
  std::vector<double> alpha;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> dual_trace;
  std::vector<double> train_decisions;
};

SmoOutput run_smo(const Matrix& k, const std::vector<int>& y, double c, double tol,
                  std::size_t max_iters) {
  const std::size_t n = y.size();
  SmoState st;
  st.alpha.assign(n, 0.0);
  st.u.assign(n, 0.0);

  SmoOutput out;
  out.dual_trace.push_back(0.0);

  auto in_up = [&](std::size_t i) {
    return (y[i] > 0 && st.alpha[i] < c) || (y[i] < 0 && st.alpha[i] > 0.0);
  };
  auto in_low = [&](std::size_t i) {
    return (y[i] > 0 && st.alpha[i] > 0.0) || (y[i] < 0 && st.alpha[i] < c);
  };

  std::size_t iter = 0;
  for (; iter < max_iters; ++iter) {
    // Maximal violating pair over viol_i = y_i - u_i.
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    std::size_t i_up = n, i_low = n;
    for (std::size_t i = 0; i < n; ++i) {
      const double viol = y[i] - st.u[i];
      if (in_up(i) && viol > m_up) {
        m_up = viol;
        i_up = i;
      }
      if (in_low(i) && viol < m_low) {
        m_low = viol;
        i_low = i;
      }
    }
    if (i_up == n || i_low == n || m_up - m_low <= tol) {
      out.converged = true;
      break;
    }

    const std::size_t i = i_up, j = i_low;
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    quad = std::max(quad, 1e-12);
    double delta = (m_up - m_low) / quad;  // step on beta_i (= alpha_i y_i)

    // Clip so both alphas stay inside [0, C].
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    if (y[i] > 0) {
      lo = std::max(lo, -st.alpha[i]);
      hi = std::min(hi, c - st.alpha[i]);
    } else {
      lo = std::max(lo, st.alpha[i] - c);
      hi = std::min(hi, st.alpha[i]);
    }
    if (y[j] > 0) {
      lo = std::max(lo, st.alpha[j] - c);
      hi = std::min(hi, st.alpha[j]);
    } else {
      lo = std::max(lo, -st.alpha[j]);
      hi = std::min(hi, c - st.alpha[j]);
    }
    delta = std::clamp(delta, lo, hi);
    if (delta == 0.0) break;  // numerically stuck at the boundary

    const double d_dual = (y[i] - y[j]) * delta - delta * (st.u[i] - st.u[j]) -
                          0.5 * delta * delta * quad;
    st.alpha[i] += y[i] * delta;
    st.alpha[j] -= y[j] * delta;
    for (std::size_t t = 0; t < n; ++t) st.u[t] += delta * (k(i, t) - k(j, t));
    st.dual += d_dual;
    out.dual_trace.push_back(st.dual);
  }
  out.iterations = iter;

  // Bias from free support vectors, else the violation midpoint.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (st.alpha[i] > 0.0 && st.alpha[i] < c) {
      free_sum += y[i] - st.u[i];
      ++free_count;
    }
  }
  if (free_count > 0) {
    out.bias = free_sum / static_cast<double>(free_count);
  } else {
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double viol = y[i] - st.u[i];
      if (in_up(i)) m_up = std::max(m_up, viol);
      if (in_low(i)) m_low = std::min(m_low, viol);
    }
    out.bias = 0.5 * (m_up + m_low);
  }

  out.train_decisions.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.train_decisions[i] = st.u[i] + out.bias;
  out.alpha = std::move(st.alpha);
  return out;
}

SvmModel build_model(const Matrix& features, const std::vector<int>& y,
                     const std::vector<double>& alpha, double bias, double gamma, double c) {
  SvmModel model;
  model.bias = bias;
  model.gamma = gamma;
  model.c = c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    std::vector<double> sv(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) sv[r] = features(r, i);
    model.support_vectors.push_back(std::move(sv));
    model.alphas.push_back(alpha[i] * y[i]);
  }
  return model;
}

void check_labels(const std::vector<int>& labels) {
  bool has_pos = false, has_neg = false;
  for (int l : labels) {
    if (l == 1) has_pos = true;
    else if (l == -1) has_neg = true;
    else throw ValidationError("train_svm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) {
    throw ValidationError("train_svm: both classes must be present");
  }
}

double accuracy_on(const SvmModel& model, const Matrix& features,
                   const std::vector<int>& labels) {
  const std::vector<double> dec = decision_values(model, features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if ((dec[i] >= 0.0 ? 1 : -1) == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

TrainSvmResult train_single(const Matrix& features, const std::vector<int>& labels,
                            double c, double gamma, double tol, std::size_t max_iters,
                            bool fit_probabilities) {
  const Matrix k = kernel_matrix(features, gamma);
  SmoOutput smo = run_smo(k, labels, c, tol, max_iters);

  TrainSvmResult result;
  result.model = build_model(features, labels, smo.alpha, smo.bias, gamma, c);
  result.converged = smo.converged;
  result.iterations = smo.iterations;
  result.dual_trace = std::move(smo.dual_trace);
  if (fit_probabilities) {
    auto [a, b] = fit_platt(smo.train_decisions, labels);
    result.model.platt_a = a;
    result.model.platt_b = b;
    result.model.platt_fitted = true;
  }
  return result;
}

}  // namespace

void SvmConfig::validate() const {
  if (!(c > 0.0)) throw ValidationError("SvmConfig: C must be positive");
  if (gamma < 0.0) throw ValidationError("SvmConfig: gamma must be nonnegative");
  if (!(tol > 0.0)) throw ValidationError("SvmConfig: tol must be positive");
}

double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
  if (x.size() != y.size()) {
    throw ValidationError("rbf_kernel: vectors of length " + std::to_string(x.size()) +
                          " and " + std::to_string(y.size()));
  }
  if (!(gamma > 0.0)) throw ValidationError("rbf_kernel: gamma must be positive");
  double dist = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    dist += d * d;
  }
  return std::exp(-gamma * dist);
}

TrainSvmResult train_svm(const Matrix& features, const std::vector<int>& labels,
                         const SvmConfig& cfg) {
  cfg.validate();
  if (labels.size() != features.cols()) {
    throw ValidationError("train_svm: label count does not match sample count");
  }
  check_labels(labels);

  const double default_gamma = 1.0 / static_cast<double>(std::max<std::size_t>(1, features.rows()));
  double c = cfg.c;
  double gamma = (cfg.gamma > 0.0) ? cfg.gamma : default_gamma;
  const std::size_t max_iters =
      cfg.max_iters ? cfg.max_iters : std::max<std::size_t>(100000, 200 * labels.size());

  if (cfg.grid_search) {
    // 3-fold CV, folds by index stride; best mean accuracy wins, first
    // grid entry on ties.
    const std::vector<double> c_grid = {0.1, 1.0, 10.0};
    const std::vector<double> g_grid = {0.5 * gamma, gamma, 2.0 * gamma};
    double best_acc = -1.0;
    for (double cc : c_grid) {
      for (double gg : g_grid) {
        double acc_sum = 0.0;
        for (int fold = 0; fold < 3; ++fold) {
          std::vector<std::size_t> tr_idx, va_idx;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            (static_cast<int>(i % 3) == fold ? va_idx : tr_idx).push_back(i);
          }
          Matrix tr(features.rows(), tr_idx.size()), va(features.rows(), va_idx.size());
          std::vector<int> tr_y, va_y;
          for (std::size_t t = 0; t < tr_idx.size(); ++t)
            for (std::size_t r = 0; r < features.rows(); ++r)
              tr(r, t) = features(r, tr_idx[t]);
          for (std::size_t t = 0; t < va_idx.size(); ++t)
            for (std::size_t r = 0; r < features.rows(); ++r)
              va(r, t) = features(r, va_idx[t]);
          for (std::size_t i : tr_idx) tr_y.push_back(labels[i]);
          for (std::size_t i : va_idx) va_y.push_back(labels[i]);
          bool fold_ok = true;
          bool pos = false, neg = false;
          for (int l : tr_y) (l > 0 ? pos : neg) = true;
          fold_ok = pos && neg;
          if (!fold_ok) continue;
          TrainSvmResult fold_model =
              train_single(tr, tr_y, cc, gg, cfg.tol, max_iters, false);
          acc_sum += accuracy_on(fold_model.model, va, va_y);
        }
        if (acc_sum > best_acc) {
          best_acc = acc_sum;
          c = cc;
          gamma = gg;
        }
      }
    }
  }

  return train_single(features, labels, c, gamma, cfg.tol, max_iters, true);
}

double decision_value(const SvmModel& model, const std::vector<double>& x) {
  if (!model.support_vectors.empty() && x.size() != model.feature_dim()) {
    throw ValidationError("decision_value: feature dimension mismatch");
  }
  double acc = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    acc += model.alphas[i] * rbf_kernel(model.support_vectors[i], x, model.gamma);
  }
  return acc;
}

std::vector<double> decision_values(const SvmModel& model, const Matrix& features) {
  const std::size_t n = features.cols();
  std::vector<double> out(n, model.bias);
  if (model.support_vectors.empty()) return out;
  if (features.rows() != model.feature_dim()) {
    throw ValidationError("decision_values: feature dimension mismatch");
  }
  const std::size_t m = model.support_vectors.size();
  Matrix sv(model.feature_dim(), m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t r = 0; r < model.feature_dim(); ++r)
      sv(r, j) = model.support_vectors[j][r];

  Matrix cross = matmul_tn(sv, features);  // m x n
  std::vector<double> sv_sq(m, 0.0), x_sq(n, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t r = 0; r < sv.rows(); ++r) sv_sq[j] += sv(r, j) * sv(r, j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < features.rows(); ++r)
      x_sq[i] += features(r, i) * features(r, i);

  for (std::size_t i = 0; i < n; ++i) {
    double acc = model.bias;
    for (std::size_t j = 0; j < m; ++j) {
      const double dist = std::max(0.0, sv_sq[j] + x_sq[i] - 2.0 * cross(j, i));
      acc += model.alphas[j] * std::exp(-model.gamma * dist);
    }
    out[i] = acc;
  }
  return out;
}

double proba_from_decision(const SvmModel& model, double decision) {
  if (!model.platt_fitted) {
    throw ValidationError("predict_proba: Platt parameters are not fitted");
  }
  const double t = model.platt_a * decision + model.platt_b;
  // Stable logistic evaluation from either tail.
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

double predict_proba(const SvmModel& model, const std::vector<double>& x) {
  return proba_from_decision(model, decision_value(model, x));
}

std::pair<double, double> fit_platt(const std::vector<double>& decisions,
                                    const std::vector<int>& labels) {
  if (decisions.size() != labels.size() || decisions.empty()) {
    throw ValidationError("fit_platt: bad inputs");
  }
  double prior1 = 0.0, prior0 = 0.0;
  for (int l : labels) (l > 0 ? prior1 : prior0) += 1.0;

  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  const std::size_t n = decisions.size();
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] > 0 ? hi : lo;

  // Newton with backtracking (Lin, Lin & Weng).
  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const double sigma = 1e-12;
  const double eps = 1e-5;

  auto objective = [&](double av, double bv) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = av * decisions[i] + bv;
      if (f >= 0.0)
        obj += target[i] * f + std::log(1.0 + std::exp(-f));
      else
        obj += (target[i] - 1.0) * f + std::log(1.0 + std::exp(f));
    }
    return obj;
  };

  double fval = objective(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = a * decisions[i] + b;
      double p, q;
      if (f >= 0.0) {
        p = std::exp(-f) / (1.0 + std::exp(-f));
        q = 1.0 / (1.0 + std::exp(-f));
      } else {
        p = 1.0 / (1.0 + std::exp(f));
        q = std::exp(f) / (1.0 + std::exp(f));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = target[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    bool moved = false;
    while (step >= 1e-10) {
      const double new_a = a + step * da;
      const double new_b = b + step * db;
      const double new_f = objective(new_a, new_b);
      if (new_f < fval + 1e-4 * step * gd) {
        a = new_a;
        b = new_b;
        fval = new_f;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {a, b};
}

}  // namespace smnae
