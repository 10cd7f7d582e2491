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
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "thingp/bench.hpp"
#include "thingp/blockmodels.hpp"
#include "thingp/conditioning.hpp"
#include "thingp/simulate.hpp"
#include "thingp/temporal.hpp"
#include "thingp/thinning.hpp"
#include "thingp/vecchia.hpp"

using namespace thingp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Hyperparameters random_hp(std::size_t d, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> lls(std::log(0.1), std::log(2.0));
  std::uniform_real_distribution<double> ls(std::log(0.3), std::log(3.0));
  std::uniform_real_distribution<double> ln(std::log(1e-3), std::log(0.5));
  Hyperparameters hp;
  hp.lengthscales.resize(static_cast<Eigen::Index>(d));
  for (auto &l : hp.lengthscales)
    l = std::exp(lls(rng));
  hp.signal_var = std::exp(ls(rng));
  hp.nugget = std::exp(ln(rng));
  return hp;
}

Outcome vecchia_exactness() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> pn(2, 200), pd(1, 4);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = pn(rng), d = pd(rng);
    const RowMatrix X = oracle::uniform(n, d, rng);
    const Vector y = oracle::normal(n, rng);
    const auto hp = random_hp(d, rng);
    const auto plan = build_training_plan(partition(n, 1), X, hp.lengthscales, n - 1, rng());
    const double v = vecchia_loglik(X, y, plan, KernelSpec::matern15(), hp);
    const double o = oracle::dense_loglik(X, y, hp.lengthscales, hp.signal_var, hp.nugget,
                                          oracle::matern15);
    worst = std::max(worst, oracle::rel(v, o));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 10.0,
          "50 datasets, max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s"};
}

Outcome gradient_check() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 150, d = 1 + rep % 4;
    const RowMatrix X = oracle::uniform(n, d, rng);
    const Vector y = oracle::normal(n, rng);
    const auto hp = random_hp(d, rng);
    const auto plan = build_training_plan(partition(n, 1 + rep % 3), X, hp.lengthscales, 10, rng());
    const KernelSpec spec = KernelSpec::matern15();
    Vector g;
    vecchia_loglik_grad(X, y, plan, spec, hp, g);
    const Vector theta = hp.to_log();
    auto f = [&](const Vector &th) {
      return vecchia_loglik(X, y, plan, spec, Hyperparameters::from_log(th, d));
    };
    // Richardson-extrapolated central differences.
    Vector fd(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      auto central = [&](double h) {
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        return (f(tp) - f(tm)) / (2.0 * h);
      };
      fd[k] = (4.0 * central(5e-4) - central(1e-3)) / 3.0;
    }
    const double scale = fd.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double denom = std::max({std::abs(fd[k]), 1e-3 * scale, 1e-8});
      worst = std::max(worst, std::abs(g[k] - fd[k]) / denom);
    }
  }
  return {worst <= 1e-4, "20 points, max rel err " + fmt("%.2e", worst)};
}

Outcome prediction_exactness() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> pn(2, 200), pd(1, 4);
  double worst = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = pn(rng), d = pd(rng);
    const Dataset train = make_dataset(oracle::uniform(n, d, rng), oracle::normal(n, rng));
    VecchiaModel model;
    model.hp = random_hp(d, rng);
    const RowMatrix xs = oracle::uniform(1, d, rng);
    const auto p = predict_vecchia(model, train, xs, Vector(), n, 1);
    const auto o = oracle::dense_posterior(train.x, train.y, xs, model.hp.lengthscales,
                                           model.hp.signal_var, model.hp.nugget,
                                           oracle::matern15);
    worst = std::max(worst, oracle::rel(p.mean[0], o.mean));
    worst = std::max(worst, oracle::rel(p.sd[0] * p.sd[0], o.var + model.hp.nugget));
  }
  return {worst <= 1e-8, "30 datasets, max rel err " + fmt("%.2e", worst)};
}

BenchConfig arm_config(std::size_t M, std::size_t n_train, std::size_t n_test) {
  BenchConfig cfg;
  cfg.M = M;
  cfg.n_train = n_train;
  cfg.n_test = n_test;
  return cfg;
}

void save(const MetricReport &report, const BenchConfig &cfg, const std::string &dir) {
  std::filesystem::create_directories(dir);
  write_report(report, cfg, dir);
}

Outcome thinning_benefit(const std::string &out) {
  BenchConfig cfg = arm_config(13, 20000, 10000);
  cfg.methods = {"sv", "thinned-sv"};
  cfg.replications = 3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = run_protocol(cfg);
  save(report, cfg, out + "/benefit");
  const double sv = mean_rmse(report, "sv"), thin = mean_rmse(report, "thinned-sv");
  const double gain = (sv - thin) / sv;
  return {thin < sv && gain >= 0.05,
          "SV(x) " + fmt("%.4f", sv) + ", thinned SV " + fmt("%.4f", thin) + ", improvement " +
              fmt("%.1f", 100.0 * gain) + "%, " + fmt("%.0f", seconds_since(t0)) + " s"};
}

Outcome low_autocorrelation_parity(const std::string &out) {
  BenchConfig cfg = arm_config(0, 20000, 10000);
  cfg.methods = {"sv", "thinned-sv"};
  cfg.replications = 1;
  const auto report = run_protocol(cfg);
  save(report, cfg, out + "/parity");
  const double sv = mean_rmse(report, "sv"), thin = mean_rmse(report, "thinned-sv");
  const double gap = std::abs(thin - sv) / sv;
  return {gap <= 0.10, "SV(x) " + fmt("%.4f", sv) + ", thinned SV " + fmt("%.4f", thin) +
                           " (T = " + std::to_string(report.rows.back().T) + "), gap " +
                           fmt("%.1f", 100.0 * gap) + "%"};
}

Outcome thinning_numbers() {
  const std::pair<std::size_t, std::size_t> targets[] = {{0, 2}, {13, 15}, {24, 23}};
  bool ok = true;
  std::string detail;
  for (auto [M, target] : targets) {
    detail += "M=" + std::to_string(M) + ":";
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto data = simulate(default_arm_spec(M, seed), 20000, 0).train;
      const std::size_t T = select_thinning_number(data).T;
      ok = ok && (T + 3 >= target && T <= target + 3);
      detail += " " + std::to_string(T);
    }
    detail += "; ";
  }
  detail.resize(detail.size() - 2);
  return {ok, detail + " (targets 2/15/23 +-3)"};
}

Outcome sweep_shape(const std::string &out) {
  BenchConfig cfg = arm_config(13, 20000, 2000);
  cfg.protocol = Protocol::ThinningSweep;
  cfg.methods = {"thinned-sv"};
  cfg.T_grid = parse_index_list("1,5..50:5,300..500:50");
  const auto report = run_protocol(cfg);
  save(report, cfg, out + "/sweep");
  const double base = mean_rmse(report, "thinned-sv", 1, 1);
  const double mid = mean_rmse(report, "thinned-sv", 5, 50);
  const double far = mean_rmse(report, "thinned-sv", 300, 500);
  return {mid < base && mid < far, "T=1 " + fmt("%.4f", base) + ", T in 5..50 " +
                                       fmt("%.4f", mid) + ", T in 300..500 " + fmt("%.4f", far)};
}

Outcome ensemble_identities() {
  std::mt19937_64 rng(808);
  std::uniform_int_distribution<int> pt(1, 30);
  double worst = 0.0;
  bool bound = true;
  for (int rep = 0; rep < 1000; ++rep) {
    const int T = pt(rng);
    const bool degenerate = rep % 10 == 0;
    std::vector<Vector> means, sds;
    const Vector c = oracle::normal(3, rng), s = oracle::normal(3, rng).cwiseAbs();
    for (int z = 0; z < T; ++z) {
      means.push_back(degenerate ? c : oracle::normal(3, rng));
      sds.push_back(degenerate ? s : Vector(oracle::normal(3, rng).cwiseAbs()));
    }
    const auto e = ensemble_predict(means, sds);
    for (Eigen::Index i = 0; i < 3; ++i) {
      double fbar = 0.0;
      for (int z = 0; z < T; ++z)
        fbar += means[z][i];
      fbar /= T;
      double var = 0.0, spread = 0.0;
      for (int z = 0; z < T; ++z) {
        var += sds[z][i] * sds[z][i] + (means[z][i] - fbar) * (means[z][i] - fbar);
        spread = std::max(spread, std::abs(means[z][i] - fbar));
      }
      var /= T;
      worst = std::max(worst, std::abs(e.mean[i] - fbar) / std::max(1.0, std::abs(fbar)));
      worst = std::max(worst, std::abs(e.sd[i] * e.sd[i] - var) / std::max(1.0, var));
      if (degenerate) {
        worst = std::max(worst, std::abs(e.mean[i] - c[i]) / std::max(1.0, std::abs(c[i])));
        worst = std::max(worst, std::abs(e.sd[i] - s[i]) / std::max(1.0, s[i]));
      }
      bound = bound && e.sd[i] >= 0.0 && e.sd[i] >= spread / std::sqrt(double(T)) - 1e-12;
    }
  }
  return {worst <= 1e-12 && bound, "1000 instances, max err " + fmt("%.2e", worst)};
}

Outcome metric_identities() {
  std::mt19937_64 rng(909);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 1 + rng() % 200;
    const Vector y = oracle::normal(n, rng), m = oracle::normal(n, rng);
    const Vector s = oracle::normal(n, rng).cwiseAbs().array() + 0.5;
    // Two-pass RMSE and direct Gaussian log density.
    double se = 0.0, nl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      se += (y[i] - m[i]) * (y[i] - m[i]);
      const double z = (y[i] - m[i]) / s[i];
      nl -= std::log(std::exp(-0.5 * z * z) / (s[i] * std::sqrt(2.0 * std::numbers::pi)));
    }
    worst = std::max(worst, std::abs(rmse(y, m) - std::sqrt(se / double(n))));
    worst = std::max(worst, std::abs(nlpd(y, m, s) - nl / double(n)) / std::max(1.0, nl / double(n)));
  }
  const Vector y = Vector::LinSpaced(50, -2.0, 2.0);
  const double a = nlpd(y, y, Vector::Ones(50));
  const Vector sd = Vector::Constant(50, std::sqrt(std::numbers::e / (2.0 * std::numbers::pi)));
  const double b = nlpd(y, y, sd);
  const bool closed = a == 0.5 * std::log(2.0 * std::numbers::pi) && b == 0.5;
  return {worst <= 1e-12 && closed, "max err " + fmt("%.2e", worst) + ", closed forms " +
                                        fmt("%.17g", a) + " and " + fmt("%.17g", b)};
}

Outcome stability(const std::string &out) {
  BenchConfig cfg = arm_config(13, 5000, 2000);
  cfg.protocol = Protocol::Stability;
  cfg.methods = {"sv", "thinned-sv", "twin", "thinned-twin"};
  cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto report = run_protocol(cfg);
  save(report, cfg, out + "/stability");
  const double sv = rmse_spread(report, "sv"), tsv = rmse_spread(report, "thinned-sv");
  const double tw = rmse_spread(report, "twin"), ttw = rmse_spread(report, "thinned-twin");
  return {tsv <= sv && ttw <= tw, "spread SV(x) " + fmt("%.2e", sv) + ", thinned SV " +
                                      fmt("%.2e", tsv) + ", twin " + fmt("%.2e", tw) +
                                      ", thinned twin " + fmt("%.2e", ttw)};
}

Outcome conditioning_invariants() {
  std::mt19937_64 rng(1111);
  std::size_t cases = 0, violations = 0;
  while (cases < 100000) {
    const std::size_t n = 2 + rng() % 60, d = 1 + rng() % 3;
    const std::size_t T = 1 + rng() % std::max<std::size_t>(1, n / 2);
    const std::size_t m = 1 + rng() % 12;
    const RowMatrix X = oracle::uniform(n, d, rng);
    Vector ls(static_cast<Eigen::Index>(d));
    for (auto &l : ls)
      l = 0.2 + (rng() % 100) / 50.0;
    const auto part = partition(n, T);
    const auto plan = build_training_plan(part, X, ls, m, rng());
    std::vector<std::size_t> rank(n), count(T, 0);
    std::vector<char> seen(n, 0);
    for (const auto &e : plan.entries) {
      rank[e.point] = count[e.block]++;
      violations += seen[e.point]++ != 0;
    }
    violations += plan.entries.size() != n;
    for (const auto &e : plan.entries) {
      violations += part.block_of(e.point) != e.block;
      violations += e.neighbors.size() != std::min(rank[e.point], m);
      for (Index c : e.neighbors)
        violations += part.block_of(c) != e.block || rank[c] >= rank[e.point];
    }
    ++cases;
  }
  return {violations == 0,
          std::to_string(cases) + " random plans, " + std::to_string(violations) + " violations"};
}

Outcome temporal_locality() {
  std::mt19937_64 rng(1212);
  // Perturbation outside the window leaves predict_g unchanged.
  ResidualSeries res;
  res.t = Vector::LinSpaced(2000, 1.0, 2000.0);
  res.r = oracle::normal(2000, rng);
  for (Eigen::Index i = 1; i < 2000; ++i)
    res.r[i] += 0.7 * res.r[i - 1];
  const std::size_t T = 15;
  const TemporalModel g = fit_g(res, T);
  const Vector ts = Vector::LinSpaced(40, 30.0, 1970.0);
  const auto before = predict_g(g, res, ts);
  bool local = true;
  for (Eigen::Index k = 0; k < ts.size(); ++k) {
    ResidualSeries moved = res;
    for (Eigen::Index i = 0; i < moved.t.size(); ++i)
      if (std::abs(moved.t[i] - ts[k]) > double(T))
        moved.r[i] += 10.0 * oracle::normal(1, rng)[0];
    const auto after = predict_g(g, moved, ts.segment(k, 1));
    local = local && after.pred.mean[0] == before.pred.mean[k] &&
            after.pred.sd[0] == before.pred.sd[k];
  }
  // Full pipeline on a test period starting more than T after training.
  const auto spec = default_arm_spec(3, 5);
  const Dataset train = simulate_series(spec, 1500, 1.0, 17);
  const Dataset test = simulate_series(spec, 300, 1500.0 + double(T) + 1.0, 18);
  VecchiaConfig vc;
  vc.m = 10;
  const auto [model, report] = fit_vecchia(train, partition(train.n(), T), vc);
  const auto f = predict_vecchia(model, train, test.x, test.t, 30, 1);
  ResidualSeries tr;
  tr.t = train.t;
  tr.r = train.y - fitted_training_values(model, train, 10);
  const TemporalModel gm = fit_g(tr, T);
  const auto combined = combine(f, g_contribution(predict_g(gm, tr, test.t)));
  const bool reduced = combined.mean == f.mean && combined.sd == f.sd;
  return {local && reduced, std::string("window locality ") + (local ? "exact" : "violated") +
                                ", far-test reduction " + (reduced ? "bitwise" : "differs")};
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"thingp acceptance checks"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out, "directory for bench artifacts");
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"vecchia exactness", vecchia_exactness},
      {"gradient correctness", gradient_check},
      {"prediction exactness", prediction_exactness},
      {"thinning benefit (M = 13)", [&] { return thinning_benefit(out); }},
      {"low-autocorrelation parity (M = 0)", [&] { return low_autocorrelation_parity(out); }},
      {"thinning-number recovery", thinning_numbers},
      {"thinning sweep shape", [&] { return sweep_shape(out); }},
      {"ensemble identities", ensemble_identities},
      {"metric identities", metric_identities},
      {"stability", [&] { return stability(out); }},
      {"conditioning invariants", conditioning_invariants},
      {"g locality and reduction", temporal_locality},
  };
  log::set_sink([](std::string_view, std::string_view) {});
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
      continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
