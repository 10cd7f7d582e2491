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
#include "thingp/blockmodels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Cholesky>

#include "thingp/conditioning.hpp"
#include "thingp/exact_gp.hpp"

namespace thingp {

EnsemblePrediction ensemble_predict(std::vector<Vector> block_mean,
                                    std::vector<Vector> block_sd) {
  if (block_mean.empty() || block_mean.size() != block_sd.size())
    throw ConfigError("ensemble_predict needs one mean and sd vector per block");
  const Eigen::Index k = block_mean.front().size();
  for (std::size_t z = 0; z < block_mean.size(); ++z)
    if (block_mean[z].size() != k || block_sd[z].size() != k)
      throw DataError("ensemble_predict: block predictions differ in length");

  const double T = static_cast<double>(block_mean.size());
  EnsemblePrediction out;
  out.mean = Vector::Zero(k);
  for (const auto &m : block_mean)
    out.mean += m;
  out.mean /= T;
  Vector var = Vector::Zero(k);
  for (std::size_t z = 0; z < block_mean.size(); ++z)
    var.array() += block_sd[z].array().square() +
                   (block_mean[z] - out.mean).array().square();
  var /= T;
  out.sd = var.cwiseMax(0.0).cwiseSqrt();
  out.block_mean = std::move(block_mean);
  out.block_sd = std::move(block_sd);
  return out;
}

TwinSizes default_twin_sizes(std::size_t n, std::size_t d) {
  TwinSizes s;
  const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  s.n_g = std::min(50 * d, std::max(root, 10 * d));
  s.k_loc = std::max<std::size_t>(25, 3 * d);
  s.n_val = 2 * s.n_g;
  return s;
}

double TwinBlend::kernel(double r) const {
  const double kg = kernel_eval(KernelSpec::squared_exponential(), r, global.signal_var);
  const double kl = kernel_eval(KernelSpec::compact_rbf(radius), r, global.signal_var);
  return (1.0 - lambda) * kg + lambda * kl;
}

namespace {

double sqdist(const double *a, const double *b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

Matrix blend_cov(const TwinBlend &blend, const RowMatrix &A, const std::vector<Index> &ia,
                 const RowMatrix &B, const std::vector<Index> &ib) {
  Matrix K(static_cast<Eigen::Index>(ia.size()), static_cast<Eigen::Index>(ib.size()));
  const Eigen::Index d = A.cols();
  for (std::size_t i = 0; i < ia.size(); ++i)
    for (std::size_t j = 0; j < ib.size(); ++j)
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = blend.kernel(
          std::sqrt(sqdist(A.row(static_cast<Eigen::Index>(ia[i])).data(),
                           B.row(static_cast<Eigen::Index>(ib[j])).data(), d)));
  return K;
}

/// Greedy farthest-point selection of `count` members of `pool`.
std::vector<Index> farthest_points(const RowMatrix &X, const std::vector<Index> &pool,
                                   std::size_t count, std::uint64_t seed) {
  std::vector<Index> out;
  if (pool.empty() || count == 0)
    return out;
  count = std::min(count, pool.size());
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::size_t cur = pick(rng);
  std::vector<double> dmin(pool.size(), std::numeric_limits<double>::infinity());
  const Eigen::Index d = X.cols();
  for (std::size_t step = 0; step < count; ++step) {
    out.push_back(pool[cur]);
    dmin[cur] = -1.0;
    const double *c = X.row(static_cast<Eigen::Index>(pool[cur])).data();
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (dmin[i] < 0.0)
        continue;
      dmin[i] = std::min(dmin[i], sqdist(X.row(static_cast<Eigen::Index>(pool[i])).data(), c, d));
      if (dmin[i] > best_d) {
        best_d = dmin[i];
        best = i;
      }
    }
    cur = best;
  }
  return out;
}

double sample_var(const Vector &y) {
  if (y.size() < 2)
    return 1.0;
  const double m = y.mean();
  return (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
}

RowMatrix take_rows(const RowMatrix &x, const std::vector<Index> &idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Vector take(const Vector &y, const std::vector<Index> &idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(idx[i])];
  return out;
}

/// Runs body(i) for i in [0, n) in parallel and rethrows the first error.
template <class F> void parallel_for(std::size_t n, F body) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(thingp_blockmodels_error)
      if (!err)
        err = std::current_exception();
    }
  }
  if (err)
    std::rethrow_exception(err);
}

} // namespace

TwinBlockModel::TwinBlockModel(RowMatrix x, Vector y, std::vector<Index> support,
                               TwinBlend blend, std::size_t k_loc)
    : x_(std::move(x)), y_(std::move(y)), support_(std::move(support)),
      blend_(std::move(blend)), k_loc_(k_loc) {
  blend_.global.validate();
  scaled_ = scale_inputs(x_, blend_.global.lengthscales);
  std::vector<char> in_support(static_cast<std::size_t>(y_.size()), 0);
  for (Index s : support_)
    in_support[s] = 1;
  for (Index i = 0; i < in_support.size(); ++i)
    if (!in_support[i])
      others_.push_back(i);
  k_loc_ = std::min(k_loc_, others_.size());

  Matrix K = blend_cov(blend_, scaled_, support_, scaled_, support_);
  K.diagonal().array() += blend_.global.nugget;
  const auto chol = cholesky_with_jitter(std::move(K), blend_.global.signal_var,
                                         "twin support covariance");
  L_ = chol.llt.matrixL();
  a_ = L_.triangularView<Eigen::Lower>().solve(take(y_, support_));
  W_ = L_.triangularView<Eigen::Lower>().solve(
      blend_cov(blend_, scaled_, support_, scaled_, others_));
}

PredictionResult TwinBlockModel::predict(const RowMatrix &xs) const {
  const RowMatrix qs = scale_inputs(xs, blend_.global.lengthscales);
  const Eigen::Index k = qs.rows();
  const double nug = blend_.global.nugget;
  const double prior = blend_.global.signal_var + nug;
  PredictionResult out;
  out.mean.resize(k);
  out.sd.resize(k);
  std::vector<Index> pos_of(static_cast<std::size_t>(y_.size()), 0);
  for (Index p = 0; p < others_.size(); ++p)
    pos_of[others_[p]] = p;
  const std::vector<Index> star{0};

  parallel_for(static_cast<std::size_t>(k), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    RowMatrix q = qs.row(i);
    const Vector ks = blend_cov(blend_, scaled_, support_, q, star).col(0);
    const Vector w = L_.triangularView<Eigen::Lower>().solve(ks);
    double mean = w.dot(a_);
    double var = prior - w.squaredNorm();
    if (k_loc_ > 0) {
      const auto nb = k_nearest(scaled_, others_, q.data(), k_loc_);
      Matrix WN(W_.rows(), static_cast<Eigen::Index>(nb.size()));
      for (std::size_t j = 0; j < nb.size(); ++j)
        WN.col(static_cast<Eigen::Index>(j)) = W_.col(static_cast<Eigen::Index>(pos_of[nb[j]]));
      Matrix C = blend_cov(blend_, scaled_, nb, scaled_, nb);
      C.diagonal().array() += nug;
      C.noalias() -= WN.transpose() * WN;
      const Vector r = blend_cov(blend_, scaled_, nb, q, star).col(0) - WN.transpose() * w;
      const Vector e = take(y_, nb) - WN.transpose() * a_;
      const auto chol = cholesky_with_jitter(std::move(C), blend_.global.signal_var,
                                             "twin local covariance");
      const Matrix LC = chol.llt.matrixL();
      const Vector u = LC.triangularView<Eigen::Lower>().solve(r);
      const Vector b = LC.triangularView<Eigen::Lower>().solve(e);
      mean += u.dot(b);
      var -= u.squaredNorm();
    }
    out.mean[i] = mean;
    out.sd[i] = std::sqrt(std::max(var, nug));
  });
  return out;
}

TwinBlockFit twin_fit(const RowMatrix &x, const Vector &y, const TwinSizes &sizes,
                      const TwinConfig &cfg, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(y.size());
  if (static_cast<std::size_t>(x.rows()) != n || n < 2)
    throw DataError("twin_fit: need at least two rows with matching x and y");
  if (sizes.n_g < 2)
    throw ConfigError("twin support size n_g must be >= 2");
  if (cfg.lambda_grid.empty())
    throw ConfigError("twin lambda grid is empty");
  for (double l : cfg.lambda_grid)
    if (!(l >= 0.0 && l <= 1.0))
      throw ConfigError("twin lambda values must lie in [0, 1]");

  TwinBlockFit result;
  result.sizes = sizes;
  const auto d = static_cast<std::size_t>(x.cols());
  exact::FitOptions fopts;
  fopts.max_iter = cfg.max_iter;
  auto fit_global = [&](const std::vector<Index> &support) {
    const RowMatrix xs = take_rows(x, support);
    const Vector ys = take(y, support);
    Hyperparameters init;
    init.lengthscales = Vector::Constant(static_cast<Eigen::Index>(d), std::sqrt(static_cast<double>(d)));
    init.signal_var = std::max(sample_var(ys), 1e-6);
    init.nugget = 0.05 * init.signal_var;
    return exact::fit(KernelSpec::squared_exponential(), xs, ys, init, fopts).hp;
  };

  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  if (sizes.n_g >= n) {
    // Support covers the whole block: a plain global GP.
    TwinBlend blend;
    blend.global = fit_global(all);
    blend.lambda = 0.0;
    result.sizes.n_g = n;
    result.sizes.k_loc = 0;
    result.sizes.n_val = 0;
    result.model = TwinBlockModel(x, y, all, blend, 0);
    return result;
  }
  if (n <= sizes.n_g + sizes.k_loc)
    throw DataError("twin block has " + std::to_string(n) + " points; needs more than n_g + k_loc = " +
                    std::to_string(sizes.n_g + sizes.k_loc));

  // Held-out validation slice, never used as support or neighbor while lambda
  // is chosen.
  std::size_t n_val = std::min(sizes.n_val, n - sizes.n_g - sizes.k_loc - 1);
  if (n_val < sizes.n_val)
    log::warn("twin validation set shrunk from " + std::to_string(sizes.n_val) + " to " +
              std::to_string(n_val) + " points to fit the block");
  result.sizes.n_val = n_val;
  std::vector<Index> perm = all;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(derive_seed(seed, "validation")));
  std::vector<Index> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<Index> pool(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val.begin(), val.end());
  std::sort(pool.begin(), pool.end());

  // Support points in positions of `pool`, then mapped to block indices.
  std::vector<Index> pool_pos(pool.size());
  std::iota(pool_pos.begin(), pool_pos.end(), Index{0});
  const RowMatrix x_pool = take_rows(x, pool);
  const Vector y_pool = take(y, pool);
  const std::vector<Index> support_pos =
      farthest_points(x_pool, pool_pos, sizes.n_g, derive_seed(seed, "support"));
  std::vector<Index> support;
  for (Index p : support_pos)
    support.push_back(pool[p]);

  TwinBlend blend;
  blend.global = fit_global(support);

  // Local radius: largest k_loc-th neighbor distance over a probe sample.
  {
    const RowMatrix scaled = scale_inputs(x_pool, blend.global.lengthscales);
    std::vector<Index> probe = pool_pos;
    std::shuffle(probe.begin(), probe.end(), std::mt19937_64(derive_seed(seed, "radius-probe")));
    probe.resize(std::min(probe.size(), std::max<std::size_t>(cfg.radius_probe, 1)));
    double radius = 0.0;
    for (Index p : probe) {
      const auto nb = k_nearest(scaled, pool_pos, scaled.row(static_cast<Eigen::Index>(p)).data(),
                                sizes.k_loc + 1);
      const Index far = nb.back();
      radius = std::max(radius, std::sqrt(sqdist(scaled.row(static_cast<Eigen::Index>(far)).data(),
                                                 scaled.row(static_cast<Eigen::Index>(p)).data(),
                                                 scaled.cols())));
    }
    blend.radius = radius > 0.0 ? radius : 1.0;
  }

  if (n_val == 0) {
    log::warn("twin block has no room for validation points; using lambda = 0");
    blend.lambda = 0.0;
  } else {
    const RowMatrix x_val = take_rows(x, val);
    const Vector y_val = take(y, val);
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : cfg.lambda_grid) {
      TwinBlend trial = blend;
      trial.lambda = lambda;
      const TwinBlockModel m(x_pool, y_pool, support_pos, trial, sizes.k_loc);
      const double mse = (m.predict(x_val).mean - y_val).squaredNorm() / static_cast<double>(n_val);
      result.lambda_mse.push_back(mse);
      if (mse < best) {
        best = mse;
        blend.lambda = lambda;
      }
    }
  }
  result.model = TwinBlockModel(x, y, support, blend, sizes.k_loc);
  return result;
}

namespace {

TwinSizes resolve_sizes(const TwinConfig &cfg, std::size_t n, std::size_t d) {
  TwinSizes s = default_twin_sizes(n, d);
  if (cfg.n_g)
    s.n_g = *cfg.n_g;
  if (cfg.k_loc)
    s.k_loc = *cfg.k_loc;
  if (cfg.n_val)
    s.n_val = *cfg.n_val;
  return s;
}

std::pair<RowMatrix, Vector> working_data(const Dataset &train, bool standardize_data,
                                          Standardization &st) {
  if (!standardize_data) {
    st = Standardization{};
    return {train.x, train.y};
  }
  auto [ws, s] = standardize(train);
  if (ws.d() != train.d())
    throw DataError("training data has zero-variance covariates; remove them first");
  st = s;
  return {std::move(ws.x), std::move(ws.y)};
}

} // namespace

TwinEnsemble fit_twin(const Dataset &train, const BlockPartition &part,
                      const TwinConfig &cfg) {
  if (part.n() != train.n())
    throw ConfigError("partition size differs from the training set");
  TwinEnsemble model;
  model.T = part.T;
  auto [X, y] = working_data(train, cfg.standardize, model.standardization);
  model.sizes = resolve_sizes(cfg, train.n(), train.d());
  model.blocks.resize(part.blocks.size());
  model.lambda_mse.resize(part.blocks.size());
  std::vector<TwinSizes> used(part.blocks.size());
  parallel_for(part.blocks.size(), [&](std::size_t b) {
    const auto &idx = part.blocks[b];
    const TwinSizes sizes =
        cfg.sizes_from_full ? model.sizes : resolve_sizes(cfg, idx.size(), train.d());
    auto fit = twin_fit(take_rows(X, idx), take(y, idx), sizes, cfg,
                        derive_seed(cfg.seed, "twin", b));
    model.blocks[b] = std::move(fit.model);
    model.lambda_mse[b] = std::move(fit.lambda_mse);
    used[b] = fit.sizes;
  });
  if (!cfg.sizes_from_full && !used.empty())
    model.sizes = used.front();
  return model;
}

EnsemblePrediction predict_twin(const TwinEnsemble &model, const RowMatrix &test_x) {
  if (model.blocks.empty())
    throw ConfigError("twin ensemble has no blocks");
  const RowMatrix xs = model.standardization.apply_x(test_x);
  std::vector<Vector> means, sds;
  for (const auto &block : model.blocks) {
    const auto p = block.predict(xs);
    means.push_back(model.standardization.invert_y(p.mean));
    sds.push_back(model.standardization.invert_sd(p.sd));
  }
  return ensemble_predict(std::move(means), std::move(sds));
}

KeyValueFile to_kv(const TwinEnsemble &model, const TwinConfig &cfg) {
  KeyValueFile kv;
  kv.set("format", std::string("thingp-model"));
  kv.set("version", std::int64_t{1});
  kv.set("method", std::string("twin"));
  kv.set("T", model.T);
  kv.set("n_g", model.sizes.n_g);
  kv.set("k_loc", model.sizes.k_loc);
  kv.set("n_val", model.sizes.n_val);
  kv.set("seed", static_cast<std::size_t>(cfg.seed));
  kv.set("standardized", model.standardization.applied);
  std::size_t n = 0;
  for (const auto &b : model.blocks)
    n += b.n();
  kv.set("n_train", n);
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    const auto &blk = model.blocks[b];
    const auto &hp = blk.blend().global;
    const std::string p = "block." + std::to_string(b) + ".";
    kv.set(p + "lengthscales", std::vector<double>(hp.lengthscales.data(),
                                                   hp.lengthscales.data() + hp.lengthscales.size()));
    kv.set(p + "signal_var", hp.signal_var);
    kv.set(p + "nugget", hp.nugget);
    kv.set(p + "lambda", blk.blend().lambda);
    kv.set(p + "radius", blk.blend().radius);
    kv.set(p + "k_loc", blk.k_loc());
    kv.set(p + "support", std::vector<std::size_t>(blk.support().begin(), blk.support().end()));
  }
  return kv;
}

TwinEnsemble twin_model_from_kv(const KeyValueFile &kv, const Dataset &train) {
  if (kv.get_or("format", "") != "thingp-model")
    throw DataError("not a thingp model file");
  if (kv.get_int("version") != 1)
    throw DataError("unsupported model format version " + kv.get("version"));
  if (kv.get("method") != "twin")
    throw DataError("model file holds a '" + kv.get("method") + "' model, expected twin");
  if (kv.get_size("n_train") != train.n())
    throw DataError("training data has " + std::to_string(train.n()) +
                    " rows; the model was fitted on " + kv.get("n_train"));
  TwinEnsemble model;
  model.T = kv.get_size("T");
  model.sizes = {kv.get_size("n_g"), kv.get_size("k_loc"), kv.get_size("n_val")};
  auto [X, y] = working_data(train, kv.get_bool("standardized"), model.standardization);
  const BlockPartition part = partition(train.n(), model.T);
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    const std::string p = "block." + std::to_string(b) + ".";
    TwinBlend blend;
    const auto ls = kv.get_doubles(p + "lengthscales");
    blend.global.lengthscales = Eigen::Map<const Vector>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    blend.global.signal_var = kv.get_double(p + "signal_var");
    blend.global.nugget = kv.get_double(p + "nugget");
    blend.lambda = kv.get_double(p + "lambda");
    blend.radius = kv.get_double(p + "radius");
    const auto &idx = part.blocks[b];
    const auto support = kv.get_sizes(p + "support");
    for (auto s : support)
      if (s >= idx.size())
        throw DataError("twin model support index out of range in block " + std::to_string(b));
    model.blocks.emplace_back(take_rows(X, idx), take(y, idx),
                              std::vector<Index>(support.begin(), support.end()), blend,
                              kv.get_size(p + "k_loc"));
  }
  return model;
}

// ------------------------------------------------------------------ local GP

LagpDesign lagp_greedy(const RowMatrix &x, const std::vector<Index> &pool,
                       const double *x_star, const Hyperparameters &hp,
                       std::size_t n_start, std::size_t n_end) {
  if (n_start < 1 || n_start > n_end)
    throw ConfigError("local design needs 1 <= n_start <= n_end");
  if (pool.size() < n_end)
    throw ConfigError("local design pool is smaller than n_end");
  const KernelSpec se = KernelSpec::squared_exponential();
  const RowMatrix xs = scale_inputs(x, hp.lengthscales);
  const Eigen::Index d = xs.cols();
  Vector q(d);
  for (Eigen::Index j = 0; j < d; ++j)
    q[j] = x_star[j] / hp.lengthscales[j];
  auto kern = [&](const double *a, const double *b) {
    return kernel_eval(se, std::sqrt(sqdist(a, b, d)), hp.signal_var);
  };

  LagpDesign design;
  std::vector<Index> start = k_nearest(xs, pool, q.data(), n_start);
  std::vector<char> used(pool.size(), 0);
  std::vector<Index> cand;
  {
    std::vector<Index> sorted_start = start;
    std::sort(sorted_start.begin(), sorted_start.end());
    for (Index id : pool)
      if (!std::binary_search(sorted_start.begin(), sorted_start.end(), id))
        cand.push_back(id);
  }

  // Incremental Cholesky: L holds the factor of K_I + nug I, u_star = L^-1 k_I*,
  // U(:, c) = L^-1 k_Ic for each candidate.
  const auto cap = static_cast<Eigen::Index>(n_end);
  Matrix L = Matrix::Zero(cap, cap);
  Vector u_star = Vector::Zero(cap);
  Matrix U = Matrix::Zero(cap, static_cast<Eigen::Index>(cand.size()));
  Eigen::Index size = 0;
  const double kss = hp.signal_var;

  auto add = [&](Index id) {
    const double *p = xs.row(static_cast<Eigen::Index>(id)).data();
    Vector kp(size);
    for (Eigen::Index i = 0; i < size; ++i)
      kp[i] = kern(xs.row(static_cast<Eigen::Index>(design.selected[static_cast<std::size_t>(i)])).data(), p);
    const Vector l = L.topLeftCorner(size, size).triangularView<Eigen::Lower>().solve(kp);
    const double diag2 = hp.signal_var + hp.nugget - l.squaredNorm();
    const double diag = std::sqrt(std::max(diag2, 1e-12 * hp.signal_var));
    L.row(size).head(size) = l.transpose();
    L(size, size) = diag;
    u_star[size] = (kern(p, q.data()) - l.dot(u_star.head(size))) / diag;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      const auto cc = static_cast<Eigen::Index>(c);
      U(size, cc) = (kern(p, xs.row(static_cast<Eigen::Index>(cand[c])).data()) -
                     l.dot(U.col(cc).head(size))) / diag;
    }
    design.selected.push_back(id);
    ++size;
  };

  for (Index id : start)
    add(id);
  design.variance_trace.push_back(kss - u_star.head(size).squaredNorm());
  while (design.selected.size() < n_end) {
    std::size_t best = 0;
    double best_red = -1.0;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (used[c])
        continue;
      const auto cc = static_cast<Eigen::Index>(c);
      const double *pc = xs.row(static_cast<Eigen::Index>(cand[c])).data();
      const double cov = kern(pc, q.data()) - U.col(cc).head(size).dot(u_star.head(size));
      const double var = hp.signal_var + hp.nugget - U.col(cc).head(size).squaredNorm();
      const double red = var > 0.0 ? cov * cov / var : 0.0;
      if (red > best_red) {
        best_red = red;
        best = c;
      }
    }
    used[best] = 1;
    add(cand[best]);
    design.variance_trace.push_back(kss - u_star.head(size).squaredNorm());
  }
  return design;
}

PredictionResult predict_lagp(const Dataset &train, const BlockPartition &part,
                              const RowMatrix &test_x, const LagpConfig &cfg,
                              std::vector<LagpDesign> *designs) {
  if (part.n() != train.n())
    throw ConfigError("partition size differs from the training set");
  if (test_x.cols() != static_cast<Eigen::Index>(train.d()))
    throw DataError("test inputs have " + std::to_string(test_x.cols()) +
                    " columns; training data has " + std::to_string(train.d()));
  Standardization st;
  auto [X, y] = working_data(train, cfg.standardize, st);
  const RowMatrix Q = st.apply_x(test_x);

  std::size_t n_end = cfg.n_end;
  if (n_end > part.smallest_block()) {
    log::warn("local design size n_end = " + std::to_string(n_end) +
              " exceeds the smallest block; using " + std::to_string(part.smallest_block()));
    n_end = part.smallest_block();
  }
  const std::size_t n_start = std::min(cfg.n_start, n_end);
  const std::size_t n_cand = std::max(cfg.candidates, n_end);

  std::vector<Index> all(train.n());
  std::iota(all.begin(), all.end(), Index{0});
  const KernelSpec se = KernelSpec::squared_exponential();
  const auto d = static_cast<Eigen::Index>(train.d());
  const Eigen::Index k = Q.rows();
  PredictionResult out;
  out.mean.resize(k);
  out.sd.resize(k);
  if (designs)
    designs->assign(static_cast<std::size_t>(k), {});

  parallel_for(static_cast<std::size_t>(k), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    const double *q = Q.row(i).data();
    const Index nearest = k_nearest(X, all, q, 1).front();
    const std::size_t block = part.block_of(nearest);
    const auto pool = k_nearest(X, part.blocks[block], q, std::min(n_cand, part.blocks[block].size()));

    // Initial kernel from the candidate pool: lengthscale = median distance
    // to x_star, variance of the pool responses.
    std::vector<double> dist;
    for (Index id : pool)
      dist.push_back(std::sqrt(sqdist(X.row(static_cast<Eigen::Index>(id)).data(), q, d)));
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2), dist.end());
    Hyperparameters hp;
    hp.lengthscales = Vector::Constant(d, std::max(dist[dist.size() / 2], 1e-3));
    hp.signal_var = std::max(sample_var(take(y, pool)), 1e-6);
    hp.nugget = cfg.nugget_fraction * hp.signal_var;

    LagpDesign design = lagp_greedy(X, pool, q, hp, n_start, n_end);
    design.block = block;
    const RowMatrix xl = take_rows(X, design.selected);
    const Vector yl_raw = take(y, design.selected);
    const double center = yl_raw.mean();
    const Vector yl = (yl_raw.array() - center).matrix();

    exact::FitOptions fo;
    fo.shared_lengthscale = true;
    fo.max_iter = cfg.max_iter;
    fo.min_log_nugget = std::log(1e-6 * hp.signal_var);
    Hyperparameters fitted = hp;
    try {
      fitted = exact::fit(se, xl, yl, hp, fo).hp;
    } catch (const NumericalError &) {
      // Keep the design-stage kernel if the local refit breaks down.
    }
    const auto post = exact::predict(se, fitted, xl, yl, Q.row(i), true);
    out.mean[i] = st.invert_y(Vector::Constant(1, post.mean[0] + center))[0];
    out.sd[i] = st.invert_sd(Vector::Constant(1, std::sqrt(post.var[0])))[0];
    if (designs)
      (*designs)[row] = std::move(design);
  });
  return out;
}

} // namespace thingp
