/*
 * Copyright 2026 The thingp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */
#include "thingp/vecchia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "thingp/optimize.hpp"

namespace thingp {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

/// One conditional log-density term and, when grad != nullptr, its gradient.
/// Xs holds inputs already divided by the lengthscales.
double conditional_term(const RowMatrix &Xs, const Vector &y, const PlanEntry &e,
                        const KernelSpec &spec, const Hyperparameters &hp,
                        double *grad) {
  const Eigen::Index d = Xs.cols();
  const double s = hp.signal_var;
  const double nug = hp.nugget;
  const auto j = static_cast<Eigen::Index>(e.point);
  const auto c = static_cast<Eigen::Index>(e.neighbors.size());
  const double yj = y[j];

  if (c == 0) {
    const double v = s + nug;
    if (grad) {
      for (Eigen::Index k = 0; k < d + 2; ++k)
        grad[k] = 0.0;
      // dl/dv * dv/dtheta with dl/dv = -0.5/v + 0.5 y^2/v^2
      const double dldv = -0.5 / v + 0.5 * yj * yj / (v * v);
      grad[d] = dldv * s;
      grad[d + 1] = dldv * nug;
    }
    return -0.5 * (kLog2Pi + std::log(v) + yj * yj / v);
  }

  Matrix K(c, c);
  Vector kv(c), yC(c);
  // Radial factors -k'(r)/r, cached for the gradient pass.
  Matrix F;
  Vector fv;
  if (grad) {
    F.resize(c, c);
    fv.resize(c);
  }
  const double *xj = Xs.row(j).data();
  for (Eigen::Index a = 0; a < c; ++a) {
    const auto ia = static_cast<Eigen::Index>(e.neighbors[static_cast<std::size_t>(a)]);
    const double *xa = Xs.row(ia).data();
    yC[a] = y[ia];
    double r2 = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double diff = xa[k] - xj[k];
      r2 += diff * diff;
    }
    double f = 0.0;
    kv[a] = kernel_eval_with_factor(spec, std::sqrt(r2), s, f);
    if (grad)
      fv[a] = f;
    K(a, a) = s + nug;
    for (Eigen::Index b = 0; b < a; ++b) {
      const double *xb =
          Xs.row(static_cast<Eigen::Index>(e.neighbors[static_cast<std::size_t>(b)])).data();
      double q = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = xa[k] - xb[k];
        q += diff * diff;
      }
      K(a, b) = K(b, a) = kernel_eval_with_factor(spec, std::sqrt(q), s, f);
      if (grad)
        F(a, b) = f;
    }
  }

  Eigen::LLT<Matrix> llt;
  try {
    llt = cholesky_with_jitter(std::move(K), s).llt;
  } catch (const NumericalError &err) {
    throw NumericalError(std::string(err.what()) + " (conditioning set of point " +
                         std::to_string(e.point) + ")");
  }
  const Vector w = llt.solve(kv);
  const Vector alpha = llt.solve(yC);
  const double mu = kv.dot(alpha);
  double v = s + nug - kv.dot(w);
  const double vfloor = 1e-12 * (s + nug);
  if (v < vfloor)
    v = vfloor;
  const double resid = yj - mu;
  const double value = -0.5 * (kLog2Pi + std::log(v) + resid * resid / v);
  if (!grad)
    return value;

  // For each parameter: dl = -0.5 dv / v + resid dmu / v + 0.5 resid^2 dv / v^2
  const double cv = -0.5 / v + 0.5 * resid * resid / (v * v);
  const double cm = resid / v;

  for (Eigen::Index k = 0; k < d; ++k)
    grad[k] = 0.0;
  // dmu_k = dk^T alpha - w^T dK alpha, dv_k = -2 dk^T w + w^T dK w.
  for (Eigen::Index a = 0; a < c; ++a) {
    const auto ia = static_cast<Eigen::Index>(e.neighbors[static_cast<std::size_t>(a)]);
    const double *xa = Xs.row(ia).data();
    const double coef0 = fv[a] * (cm * alpha[a] - 2.0 * cv * w[a]);
    if (coef0 != 0.0)
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = xa[k] - xj[k];
        grad[k] += coef0 * diff * diff;
      }
    for (Eigen::Index b = 0; b < a; ++b) {
      const double f = F(a, b);
      if (f == 0.0)
        continue;
      const double *xb =
          Xs.row(static_cast<Eigen::Index>(e.neighbors[static_cast<std::size_t>(b)])).data();
      const double pa = w[a] * alpha[b] + w[b] * alpha[a];
      const double pw = 2.0 * w[a] * w[b];
      const double coef = f * (-cm * pa + cv * pw);
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = xa[k] - xb[k];
        grad[k] += coef * diff * diff;
      }
    }
  }
  const double wa = w.dot(alpha);
  const double ww = w.squaredNorm();
  const double dmu_s = nug * wa;
  const double dv_s = s - kv.dot(w) - nug * ww;
  const double dmu_n = -nug * wa;
  const double dv_n = nug + nug * ww;
  grad[d] = cv * dv_s + cm * dmu_s;
  grad[d + 1] = cv * dv_n + cm * dmu_n;
  return value;
}

double loglik_impl(const RowMatrix &X, const Vector &y,
                   const ConditioningPlan &plan, const KernelSpec &spec,
                   const Hyperparameters &hp, Vector *grad) {
  hp.validate();
  if (X.cols() != static_cast<Eigen::Index>(hp.dim()))
    throw ConfigError("vecchia: input dimension differs from lengthscale count");
  if (plan.mode != ConditioningPlan::Mode::Training)
    throw ConfigError("vecchia log-likelihood needs a training-mode plan");
  if (plan.entries.size() != static_cast<std::size_t>(y.size()))
    throw ConfigError("plan must cover every training index exactly once");

  const RowMatrix Xs = scale_inputs(X, hp.lengthscales);
  const auto n = static_cast<Eigen::Index>(plan.entries.size());
  const Eigen::Index p = X.cols() + 2;
  Vector terms(n);
  Matrix grads;
  if (grad)
    grads.resize(p, n);

  // Per-entry slots keep the reduction order fixed regardless of threading.
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index i = 0; i < n; ++i)
    terms[i] = conditional_term(Xs, y, plan.entries[static_cast<std::size_t>(i)],
                                spec, hp, grad ? grads.col(i).data() : nullptr);

  if (grad)
    *grad = grads.rowwise().sum();
  return terms.sum();
}

} // namespace

double vecchia_loglik(const RowMatrix &X, const Vector &y,
                      const ConditioningPlan &plan, const KernelSpec &spec,
                      const Hyperparameters &hp) {
  return loglik_impl(X, y, plan, spec, hp, nullptr);
}

double vecchia_loglik_grad(const RowMatrix &X, const Vector &y,
                           const ConditioningPlan &plan, const KernelSpec &spec,
                           const Hyperparameters &hp, Vector &grad) {
  return loglik_impl(X, y, plan, spec, hp, &grad);
}

RowMatrix VecchiaModel::design(const RowMatrix &x, const Vector &t) const {
  RowMatrix xs = standardization.apply_x(x);
  if (!include_time)
    return xs;
  if (t.size() != x.rows())
    throw DataError("time column required when time is a model input");
  RowMatrix out(xs.rows(), xs.cols() + 1);
  out.leftCols(xs.cols()) = xs;
  out.col(xs.cols()) = (t.array() - t_mean) / t_scale;
  return out;
}

namespace {

struct WorkingData {
  VecchiaModel model;
  RowMatrix X;
  Vector y;
};

WorkingData prepare(const Dataset &train, const VecchiaConfig &cfg) {
  WorkingData wd;
  VecchiaModel &model = wd.model;
  model.kernel = cfg.kernel;
  model.m = cfg.m;
  model.m_p = cfg.m_p;
  model.seed = cfg.seed;
  model.include_time = cfg.include_time;
  if (cfg.standardize) {
    auto [std_ds, st] = standardize(train);
    if (std_ds.d() != train.d())
      throw DataError("training data has zero-variance covariates; drop them "
                      "before fitting");
    model.standardization = st;
    wd.y = std_ds.y;
  } else {
    wd.y = train.y;
  }
  if (cfg.include_time) {
    const double n = static_cast<double>(train.n());
    model.t_mean = train.t.mean();
    const double var = (train.t.array() - model.t_mean).square().sum() / (n - 1.0);
    model.t_scale = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  wd.X = model.design(train.x, train.t);
  return wd;
}

} // namespace

std::pair<VecchiaModel, FitReport> fit_vecchia(const Dataset &train,
                                               const BlockPartition &part,
                                               const VecchiaConfig &cfg) {
  if (cfg.m < 1)
    throw ConfigError("m must be >= 1");
  if (part.n() != train.n())
    throw ConfigError("partition does not cover the training data");
  if (train.n() / part.T < cfg.m + 1)
    throw ConfigError("thinning number T = " + std::to_string(part.T) +
                      " leaves blocks smaller than m + 1 = " +
                      std::to_string(cfg.m + 1) + " (largest admissible T is " +
                      std::to_string(train.n() > cfg.m
                                         ? max_thinning_for(train.n(), cfg.m)
                                         : 0) +
                      ")");

  WorkingData wd = prepare(train, cfg);
  VecchiaModel &model = wd.model;
  model.T = part.T;
  const auto d = static_cast<std::size_t>(wd.X.cols());

  Hyperparameters hp;
  hp.lengthscales = Vector::Ones(static_cast<Eigen::Index>(d));
  const double yvar = (wd.y.array() - wd.y.mean()).square().sum() /
                      std::max<double>(1.0, static_cast<double>(wd.y.size()) - 1.0);
  hp.signal_var = yvar > 0.0 ? yvar : 1.0;
  hp.nugget = 0.1 * hp.signal_var;

  AscentOptions aopts;
  aopts.rel_tol = cfg.rel_tol;
  aopts.lower = Vector::Constant(static_cast<Eigen::Index>(d + 2), std::log(1e-4));
  aopts.upper = Vector::Constant(static_cast<Eigen::Index>(d + 2), std::log(1e4));
  aopts.lower[static_cast<Eigen::Index>(d + 1)] = std::log(1e-8 * hp.signal_var);
  aopts.upper[static_cast<Eigen::Index>(d)] = std::log(1e4 * hp.signal_var);

  FitReport report;
  for (std::size_t round = 0; round <= cfg.plan_rebuilds; ++round) {
    const ConditioningPlan plan =
        build_training_plan(part, wd.X, hp.lengthscales, cfg.m, cfg.seed);
    Objective obj = [&](const Vector &theta, Vector &g) {
      const Hyperparameters trial = Hyperparameters::from_log(theta, d);
      try {
        return vecchia_loglik_grad(wd.X, wd.y, plan, model.kernel, trial, g);
      } catch (const NumericalError &) {
        g.setZero(theta.size());
        return -std::numeric_limits<double>::infinity();
      }
    };
    aopts.max_iter = round < cfg.plan_rebuilds ? cfg.iters_per_rebuild : cfg.max_iter;
    AscentResult res;
    try {
      res = maximize(obj, hp.to_log(), aopts);
    } catch (const NumericalError &err) {
      throw NumericalError(std::string("vecchia fit diverged: ") + err.what() +
                           " after " + std::to_string(report.iterations) +
                           " iterations");
    }
    for (std::size_t k = 0; k < res.value_trace.size(); ++k) {
      report.loglik_trace.push_back(res.value_trace[k]);
      report.hp_trace.push_back(Hyperparameters::from_log(res.theta_trace[k], d));
      report.round_trace.push_back(round);
    }
    report.iterations += res.iterations;
    hp = Hyperparameters::from_log(res.theta, d);
    report.loglik = res.value;
    if (round == cfg.plan_rebuilds)
      report.converged = res.converged;
  }
  if (!report.converged)
    log::warn("vecchia fit did not converge within " +
              std::to_string(cfg.max_iter) + " iterations");
  model.hp = hp;
  model.loglik = report.loglik;
  return {std::move(model), std::move(report)};
}

ConditioningPlan final_training_plan(const VecchiaModel &model,
                                     const Dataset &train) {
  const RowMatrix X = model.design(train.x, train.t);
  return build_training_plan(partition(train.n(), model.T), X,
                             model.hp.lengthscales, model.m, model.seed);
}

PredictionResult predict_vecchia(const VecchiaModel &model, const Dataset &train,
                                 const RowMatrix &test_x, const Vector &test_t,
                                 std::size_t m_p, std::uint64_t seed) {
  if (train.n() == 0)
    throw DataError("prediction needs a non-empty training set");
  if (test_x.cols() != static_cast<Eigen::Index>(train.d()))
    throw DataError("test inputs have " + std::to_string(test_x.cols()) +
                    " columns, the model expects " + std::to_string(train.d()));
  const RowMatrix Xtr = model.design(train.x, train.t);
  const Vector ytr = model.standardization.apply_y(train.y);
  const RowMatrix Xte = model.design(test_x, test_t);
  const Hyperparameters &hp = model.hp;
  const auto n_train = static_cast<std::size_t>(Xtr.rows());
  const auto n_test = static_cast<std::size_t>(Xte.rows());

  const ConditioningPlan plan =
      prediction_plan(Xtr, Xte, hp.lengthscales, m_p, seed);
  const RowMatrix Str = scale_inputs(Xtr, hp.lengthscales);
  const RowMatrix Ste = scale_inputs(Xte, hp.lengthscales);
  auto row_of = [&](Index pool_id) -> const double * {
    return pool_id < n_train
               ? Str.row(static_cast<Eigen::Index>(pool_id)).data()
               : Ste.row(static_cast<Eigen::Index>(pool_id - n_train)).data();
  };
  const Eigen::Index d = Str.cols();
  auto dist = [d](const double *a, const double *b) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double diff = a[k] - b[k];
      s += diff * diff;
    }
    return std::sqrt(s);
  };

  // Kriging weights and variances do not depend on pseudo-observation values,
  // so they are computed independently per test point.
  std::vector<Vector> weights(n_test);
  Vector var(static_cast<Eigen::Index>(n_test));
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t k = 0; k < n_test; ++k) {
    const PlanEntry &e = plan.entries[k];
    const auto c = static_cast<Eigen::Index>(e.neighbors.size());
    const double *q = Ste.row(static_cast<Eigen::Index>(e.point)).data();
    Matrix K(c, c);
    Vector kv(c);
    for (Eigen::Index a = 0; a < c; ++a) {
      const double *xa = row_of(e.neighbors[static_cast<std::size_t>(a)]);
      kv[a] = kernel_eval(model.kernel, dist(xa, q), hp.signal_var);
      K(a, a) = hp.signal_var + hp.nugget;
      for (Eigen::Index b = 0; b < a; ++b)
        K(a, b) = K(b, a) = kernel_eval(
            model.kernel, dist(xa, row_of(e.neighbors[static_cast<std::size_t>(b)])),
            hp.signal_var);
    }
    const auto chol = cholesky_with_jitter(std::move(K), hp.signal_var,
                                           "prediction at test point " +
                                               std::to_string(e.point));
    weights[k] = chol.llt.solve(kv);
    var[static_cast<Eigen::Index>(k)] =
        std::max(hp.signal_var + hp.nugget - kv.dot(weights[k]), hp.nugget);
  }

  Vector mean_std = Vector::Zero(static_cast<Eigen::Index>(n_test));
  Vector pred_by_pos(static_cast<Eigen::Index>(n_test));
  for (std::size_t k = 0; k < n_test; ++k) {
    const PlanEntry &e = plan.entries[k];
    double mu = 0.0;
    for (std::size_t a = 0; a < e.neighbors.size(); ++a) {
      const Index id = e.neighbors[a];
      const double value = id < n_train
                               ? ytr[static_cast<Eigen::Index>(id)]
                               : mean_std[static_cast<Eigen::Index>(id - n_train)];
      mu += weights[k][static_cast<Eigen::Index>(a)] * value;
    }
    mean_std[static_cast<Eigen::Index>(e.point)] = mu;
    pred_by_pos[static_cast<Eigen::Index>(k)] = mu;
  }
  Vector sd_std(static_cast<Eigen::Index>(n_test));
  for (std::size_t k = 0; k < n_test; ++k)
    sd_std[static_cast<Eigen::Index>(plan.entries[k].point)] =
        std::sqrt(var[static_cast<Eigen::Index>(k)]);

  PredictionResult out;
  out.mean = model.standardization.invert_y(mean_std);
  out.sd = model.standardization.invert_sd(sd_std);
  return out;
}

Vector fitted_training_values(const VecchiaModel &model, const Dataset &train,
                              std::size_t k) {
  const RowMatrix X = model.design(train.x, train.t);
  const Vector y = model.standardization.apply_y(train.y);
  const Hyperparameters &hp = model.hp;
  const RowMatrix S = scale_inputs(X, hp.lengthscales);
  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  Vector fitted(static_cast<Eigen::Index>(n));
  const std::size_t kk = std::min(k, n - 1);
#pragma omp parallel for schedule(dynamic, 32)
  for (std::size_t i = 0; i < n; ++i) {
    auto nn = k_nearest(S, all, S.row(static_cast<Eigen::Index>(i)).data(), kk + 1);
    nn.erase(std::remove(nn.begin(), nn.end(), i), nn.end());
    nn.resize(std::min(nn.size(), kk));
    if (nn.empty()) {
      fitted[static_cast<Eigen::Index>(i)] = 0.0;
      continue;
    }
    RowMatrix Xc(static_cast<Eigen::Index>(nn.size()), X.cols());
    Vector yc(static_cast<Eigen::Index>(nn.size()));
    for (std::size_t a = 0; a < nn.size(); ++a) {
      Xc.row(static_cast<Eigen::Index>(a)) = X.row(static_cast<Eigen::Index>(nn[a]));
      yc[static_cast<Eigen::Index>(a)] = y[static_cast<Eigen::Index>(nn[a])];
    }
    Matrix K = cov_matrix(model.kernel, hp, Xc, true);
    const auto chol = cholesky_with_jitter(std::move(K), hp.signal_var, "fitted values");
    const Matrix kv = cross_cov(model.kernel, hp, Xc, X.row(static_cast<Eigen::Index>(i)));
    fitted[static_cast<Eigen::Index>(i)] = kv.col(0).dot(chol.llt.solve(yc));
  }
  return model.standardization.invert_y(fitted);
}

KeyValueFile to_kv(const VecchiaModel &model) {
  KeyValueFile kv;
  kv.set("format", std::string("thingp-model"));
  kv.set("version", std::int64_t{1});
  kv.set("method", std::string("vecchia"));
  kv.set("kernel", to_string(model.kernel.family));
  std::vector<double> ls(model.hp.lengthscales.data(),
                         model.hp.lengthscales.data() + model.hp.lengthscales.size());
  kv.set("lengthscales", ls);
  kv.set("signal_var", model.hp.signal_var);
  kv.set("nugget", model.hp.nugget);
  kv.set("T", model.T);
  kv.set("m", model.m);
  kv.set("m_p", model.m_p);
  kv.set("seed", static_cast<std::size_t>(model.seed));
  kv.set("include_time", model.include_time);
  kv.set("standardized", model.standardization.applied);
  if (model.standardization.applied) {
    const auto &st = model.standardization;
    kv.set("x_mean", std::vector<double>(st.x_mean.data(), st.x_mean.data() + st.x_mean.size()));
    kv.set("x_scale", std::vector<double>(st.x_scale.data(), st.x_scale.data() + st.x_scale.size()));
    kv.set("y_mean", st.y_mean);
    kv.set("y_scale", st.y_scale);
  }
  kv.set("t_mean", model.t_mean);
  kv.set("t_scale", model.t_scale);
  kv.set("loglik", model.loglik);
  return kv;
}

VecchiaModel vecchia_model_from_kv(const KeyValueFile &kv) {
  if (kv.get_or("format", "") != "thingp-model")
    throw DataError("not a thingp model file");
  if (kv.get_int("version") != 1)
    throw DataError("unsupported model format version " + kv.get("version"));
  if (kv.get("method") != "vecchia")
    throw DataError("model file holds a '" + kv.get("method") +
                    "' model, expected vecchia");
  VecchiaModel model;
  model.kernel.family = kernel_family_from_string(kv.get("kernel"));
  const auto ls = kv.get_doubles("lengthscales");
  model.hp.lengthscales = Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  model.hp.signal_var = kv.get_double("signal_var");
  model.hp.nugget = kv.get_double("nugget");
  model.hp.validate();
  model.T = kv.get_size("T");
  model.m = kv.get_size("m");
  model.m_p = kv.get_size("m_p");
  model.seed = kv.get_size("seed");
  model.include_time = kv.get_bool("include_time");
  if (kv.get_bool("standardized")) {
    auto &st = model.standardization;
    st.applied = true;
    const auto xm = kv.get_doubles("x_mean");
    const auto xs = kv.get_doubles("x_scale");
    st.x_mean = Eigen::Map<const Vector>(xm.data(), static_cast<Eigen::Index>(xm.size()));
    st.x_scale = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    st.y_mean = kv.get_double("y_mean");
    st.y_scale = kv.get_double("y_scale");
  }
  model.t_mean = kv.get_double("t_mean");
  model.t_scale = kv.get_double("t_scale");
  model.loglik = kv.get_double("loglik");
  return model;
}

} // namespace thingp
