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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "thingp/bench.hpp"
#include "thingp/blockmodels.hpp"
#include "thingp/dataset.hpp"
#include "thingp/simulate.hpp"
#include "thingp/temporal.hpp"
#include "thingp/thinning.hpp"
#include "thingp/vecchia.hpp"

using namespace thingp;

namespace {

struct DataOptions {
  std::string path;
  std::string response = "y";
  std::string time;
  std::vector<std::string> covariates;

  CsvSchema schema() const {
    CsvSchema s;
    s.response = response;
    s.covariates = covariates;
    if (!time.empty())
      s.time = time;
    return s;
  }
  Dataset load() const { return load_csv(path, schema()); }
};

void add_data_options(CLI::App *cmd, DataOptions &d, bool required = true) {
  auto *opt = cmd->add_option("--data", d.path, "training CSV file");
  if (required)
    opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--response", d.response, "response column")->capture_default_str();
  cmd->add_option("--time", d.time, "time column (default: row order)");
  cmd->add_option("--covariates", d.covariates, "covariate columns (default: all others)")
      ->delimiter(',');
}

/// Records where the training data came from so predict commands can reload it.
void stamp_data(KeyValueFile &kv, const DataOptions &d, const Dataset &ds) {
  kv.set("data.path", std::filesystem::absolute(d.path).string());
  kv.set("data.response", d.response);
  kv.set("data.time", d.time.empty() ? std::string("-") : d.time);
  std::string cov;
  for (const auto &c : ds.covariate_names)
    cov += (cov.empty() ? "" : ",") + c;
  kv.set("data.covariates", cov);
}

Dataset reload_data(const KeyValueFile &kv, const DataOptions &override_opts) {
  DataOptions d = override_opts;
  if (d.path.empty()) {
    if (!kv.has("data.path"))
      throw ConfigError("model file does not record its training data; pass --data");
    d.path = kv.get("data.path");
    d.response = kv.get("data.response");
    d.time = kv.get("data.time") == "-" ? std::string() : kv.get("data.time");
  }
  if (d.covariates.empty() && kv.has("data.covariates")) {
    std::stringstream in(kv.get("data.covariates"));
    std::string c;
    while (std::getline(in, c, ','))
      d.covariates.push_back(c);
  }
  return d.load();
}

InputTable load_test(const std::string &path, const Dataset &train, const std::string &time,
                     bool need_time) {
  std::optional<std::string> tcol;
  if (!time.empty())
    tcol = time;
  InputTable test = load_inputs_csv(path, train.covariate_names, tcol, train.response_name);
  if (need_time && test.t.size() == 0)
    throw ConfigError("this prediction needs test time stamps; pass --test-time");
  return test;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write '" + path + "'");
  out << text;
}

struct Column {
  std::string name;
  Vector values;
};

void write_predictions(const std::string &path, const std::string &header,
                       const std::vector<Column> &cols) {
  std::ostringstream out;
  out << "# " << header << '\n';
  for (std::size_t c = 0; c < cols.size(); ++c)
    out << (c ? "," : "") << cols[c].name;
  out << '\n';
  const Eigen::Index n = cols.front().values.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      out << (c ? "," : "") << format_double(cols[c].values[i]);
    out << '\n';
  }
  write_text(path, out.str());
}

void report_metrics(const InputTable &test, const PredictionResult &pred) {
  if (!test.y)
    return;
  std::cout << "rmse = " << format_double(rmse(*test.y, pred.mean)) << '\n';
  if (pred.sd.size() == pred.mean.size() && (pred.sd.array() > 0.0).all())
    std::cout << "nlpd = " << format_double(nlpd(*test.y, pred.mean, pred.sd)) << '\n';
}

std::size_t choose_T(const Dataset &train, bool thinned, std::optional<std::size_t> T,
                     std::optional<std::size_t> cap_m) {
  std::size_t out = 1;
  if (T)
    out = *T;
  else if (thinned)
    out = select_thinning_number(train).T;
  if (out < 1)
    throw ConfigError("thinning number must be >= 1");
  if (cap_m && !T && train.n() > *cap_m) {
    const std::size_t cap = max_thinning_for(train.n(), *cap_m);
    if (out > cap) {
      log::warn("thinning number " + std::to_string(out) + " capped at " + std::to_string(cap));
      out = cap;
    }
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"thingp: thinned Gaussian-process approximations for autocorrelated data"};
  app.require_subcommand(1);
  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "cap on worker threads (0 = runtime default)");
  app.add_flag("--quiet", quiet, "suppress warnings and progress messages");

  // thin-select
  auto *thin = app.add_subcommand("thin-select", "choose the thinning number T from PACFs");
  DataOptions thin_data;
  add_data_options(thin, thin_data);
  bool thin_no_y = false;
  std::size_t h_max = 100;
  std::optional<double> threshold;
  thin->add_flag("--no-y", thin_no_y, "monitor covariates only");
  thin->add_option("--h-max", h_max, "largest lag examined")->capture_default_str();
  thin->add_option("--threshold", threshold, "PACF threshold (default 2/sqrt(n))");

  // fit-sv
  auto *fit_sv = app.add_subcommand("fit-sv", "fit a (thinned) scaled-Vecchia model");
  DataOptions sv_data;
  add_data_options(fit_sv, sv_data);
  std::string sv_out;
  bool sv_thinned = false, sv_with_time = false;
  std::optional<std::size_t> sv_T;
  VecchiaConfig sv_cfg;
  std::string sv_kernel = "matern15";
  fit_sv->add_option("--out", sv_out, "model file to write")->required();
  fit_sv->add_flag("--thinned", sv_thinned, "thin with the PACF-selected T");
  fit_sv->add_option("--T", sv_T, "explicit thinning number");
  fit_sv->add_flag("--include-time", sv_with_time, "use t as an extra input (SV(x,t))");
  fit_sv->add_option("--m", sv_cfg.m, "conditioning set size")->capture_default_str();
  fit_sv->add_option("--mp", sv_cfg.m_p, "prediction conditioning size")->capture_default_str();
  fit_sv->add_option("--seed", sv_cfg.seed, "root seed")->capture_default_str();
  fit_sv->add_option("--kernel", sv_kernel, "matern15 | sqexp")->capture_default_str();
  fit_sv->add_option("--max-iter", sv_cfg.max_iter, "final optimizer iterations")
      ->capture_default_str();

  // predict-sv
  auto *pred_sv = app.add_subcommand("predict-sv", "predict with a scaled-Vecchia model");
  DataOptions psv_data;
  add_data_options(pred_sv, psv_data, false);
  std::string psv_model, psv_test, psv_out = "predictions.csv", psv_test_time, psv_resid;
  std::optional<std::size_t> psv_mp, psv_gT;
  bool psv_with_g = false;
  pred_sv->add_option("--model", psv_model, "model file")->required()->check(CLI::ExistingFile);
  pred_sv->add_option("--test", psv_test, "test CSV")->required()->check(CLI::ExistingFile);
  pred_sv->add_option("--test-time", psv_test_time, "time column of the test file");
  pred_sv->add_option("--out", psv_out, "predictions CSV")->capture_default_str();
  pred_sv->add_option("--mp", psv_mp, "override the prediction conditioning size");
  pred_sv->add_flag("--with-g", psv_with_g, "add the temporal residual model g(t)");
  pred_sv->add_option("--g-T", psv_gT, "g window half-width (default: model T)");
  pred_sv->add_option("--residuals", psv_resid, "write the training residuals (t, r) here");

  // fit-twin
  auto *fit_tw = app.add_subcommand("fit-twin", "fit a (thinned) twin ensemble");
  DataOptions tw_data;
  add_data_options(fit_tw, tw_data);
  std::string tw_out;
  bool tw_thinned = false;
  std::optional<std::size_t> tw_T;
  TwinConfig tw_cfg;
  bool tw_per_block = false;
  fit_tw->add_option("--out", tw_out, "model file to write")->required();
  fit_tw->add_flag("--thinned", tw_thinned, "thin with the PACF-selected T");
  fit_tw->add_option("--T", tw_T, "explicit thinning number");
  fit_tw->add_option("--n-g", tw_cfg.n_g, "global support size");
  fit_tw->add_option("--k-loc", tw_cfg.k_loc, "local neighborhood size");
  fit_tw->add_option("--n-val", tw_cfg.n_val, "validation size");
  fit_tw->add_flag("--sizes-per-block", tw_per_block, "derive sizes from each block");
  fit_tw->add_option("--seed", tw_cfg.seed, "root seed")->capture_default_str();

  // predict-twin
  auto *pred_tw = app.add_subcommand("predict-twin", "predict with a twin ensemble");
  DataOptions ptw_data;
  add_data_options(pred_tw, ptw_data, false);
  std::string ptw_model, ptw_test, ptw_out = "predictions.csv";
  pred_tw->add_option("--model", ptw_model, "model file")->required()->check(CLI::ExistingFile);
  pred_tw->add_option("--test", ptw_test, "test CSV")->required()->check(CLI::ExistingFile);
  pred_tw->add_option("--out", ptw_out, "predictions CSV")->capture_default_str();

  // predict-lagp
  auto *pred_la = app.add_subcommand("predict-lagp", "local GP prediction (thinned or not)");
  DataOptions la_data;
  add_data_options(pred_la, la_data);
  std::string la_test, la_out = "predictions.csv";
  bool la_thinned = false;
  std::optional<std::size_t> la_T;
  LagpConfig la_cfg;
  pred_la->add_option("--test", la_test, "test CSV")->required()->check(CLI::ExistingFile);
  pred_la->add_option("--out", la_out, "predictions CSV")->capture_default_str();
  pred_la->add_flag("--thinned", la_thinned, "thin with the PACF-selected T");
  pred_la->add_option("--T", la_T, "explicit thinning number");
  pred_la->add_option("--n-start", la_cfg.n_start, "initial nearest neighbors")
      ->capture_default_str();
  pred_la->add_option("--n-end", la_cfg.n_end, "final local design size")->capture_default_str();
  pred_la->add_option("--candidates", la_cfg.candidates, "greedy candidate pool size")
      ->capture_default_str();

  // bench
  auto *bench = app.add_subcommand("bench", "run a benchmark protocol on the robot-arm simulator");
  std::string bench_config, bench_out = "bench_out";
  std::string b_protocol, b_methods, b_seeds, b_grid;
  std::optional<std::size_t> b_M, b_ntrain, b_ntest, b_reps, b_seed;
  bench->add_option("--config", bench_config, "scenario file (key = value)")
      ->check(CLI::ExistingFile);
  bench->add_option("--protocol", b_protocol, "replication | thinning-sweep | stability");
  bench->add_option("--methods", b_methods, "comma-separated method list");
  bench->add_option("--seeds", b_seeds, "model seeds for stability, e.g. 1..10");
  bench->add_option("--T-grid", b_grid, "thinning numbers for the sweep, e.g. 1,5..50:5");
  bench->add_option("--M", b_M, "AR lag order (0 = Latin hypercube)");
  bench->add_option("--n-train", b_ntrain, "training size");
  bench->add_option("--n-test", b_ntest, "test size");
  bench->add_option("--replications", b_reps, "replications");
  bench->add_option("--seed", b_seed, "root seed");
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();

  // simulate
  auto *sim = app.add_subcommand("simulate", "write robot-arm training and test CSV files");
  std::size_t s_M = 13, s_ntrain = 20000, s_ntest = 10000;
  std::uint64_t s_seed = 1;
  ArCalibration s_cal;
  std::string s_out = ".";
  sim->add_option("--M", s_M, "AR lag order (0 = Latin hypercube)")->capture_default_str();
  sim->add_option("--n-train", s_ntrain, "training size")->capture_default_str();
  sim->add_option("--n-test", s_ntest, "test size")->capture_default_str();
  sim->add_option("--seed", s_seed, "seed")->capture_default_str();
  sim->add_option("--spectral-radius", s_cal.spectral_radius, "AR spectral radius")
      ->capture_default_str();
  sim->add_option("--psi-scale", s_cal.psi_scale, "MA noise scale")->capture_default_str();
  sim->add_option("--noise-sd", s_cal.noise_sd, "noise sd")->capture_default_str();
  sim->add_option("--innovation-sd", s_cal.innovation_sd, "AR innovation sd")
      ->capture_default_str();
  sim->add_option("--out-dir", s_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "thingp: config error: " << e.what() << '\n';
    return 2;
  }

#ifdef _OPENMP
  if (threads > 0)
    omp_set_num_threads(threads);
#endif
  if (quiet)
    log::set_sink([](std::string_view, std::string_view) {});

  try {
    if (*thin) {
      const Dataset ds = thin_data.load();
      ThinningOptions opts;
      opts.include_y = !thin_no_y;
      opts.h_max = h_max;
      opts.threshold = threshold;
      const auto choice = select_thinning_number(ds, opts);
      const auto dens = time_density(ds.t);
      std::cout << "T = " << choice.T << '\n';
      std::cout << "threshold = " << format_double(choice.threshold) << '\n';
      if (choice.T > 1)
        std::cout << "binding = " << choice.binding_series << " at lag " << choice.binding_lag
                  << '\n';
      if (choice.saturated)
        std::cout << "saturated = true\n";
      std::cout << "time gaps = min " << format_double(dens.min_gap) << ", median "
                << format_double(dens.median_gap) << ", max " << format_double(dens.max_gap)
                << '\n';
      if (ds.n() > 31)
        std::cout << "max admissible T for m = 30: " << max_thinning_for(ds.n(), 30) << '\n';
    } else if (*fit_sv) {
      const Dataset ds = sv_data.load();
      sv_cfg.include_time = sv_with_time;
      sv_cfg.kernel.family = kernel_family_from_string(sv_kernel);
      if (sv_cfg.m_p < 1)
        throw ConfigError("--mp must be >= 1");
      const std::size_t T = choose_T(ds, sv_thinned, sv_T, sv_cfg.m);
      const auto [model, report] = fit_vecchia(ds, partition(ds.n(), T), sv_cfg);
      KeyValueFile kv = to_kv(model);
      stamp_data(kv, sv_data, ds);
      kv.write(sv_out);
      std::cout << "T = " << T << "\nloglik = " << format_double(report.loglik)
                << "\niterations = " << report.iterations << '\n';
    } else if (*pred_sv) {
      const KeyValueFile kv = KeyValueFile::read(psv_model);
      const VecchiaModel model = vecchia_model_from_kv(kv);
      const Dataset train = reload_data(kv, psv_data);
      const InputTable test =
          load_test(psv_test, train, psv_test_time, model.include_time || psv_with_g);
      const std::size_t mp = psv_mp ? *psv_mp : model.m_p;
      if (mp < 1)
        throw ConfigError("--mp must be >= 1");
      PredictionResult f = predict_vecchia(model, train, test.x, test.t, mp,
                                           derive_seed(model.seed, "prediction"));
      std::vector<Column> cols;
      PredictionResult out = f;
      if (psv_with_g) {
        ResidualSeries res;
        res.t = train.t;
        res.r = train.y - fitted_training_values(model, train, model.m);
        if (!psv_resid.empty()) {
          std::ostringstream r;
          r << "t,r\n";
          for (Eigen::Index i = 0; i < res.t.size(); ++i)
            r << format_double(res.t[i]) << ',' << format_double(res.r[i]) << '\n';
          write_text(psv_resid, r.str());
        }
        const TemporalModel g = fit_g(res, psv_gT ? *psv_gT : model.T);
        const PredictionResult gc = g_contribution(predict_g(g, res, test.t));
        out = combine(f, gc);
        cols = {{"mean", out.mean}, {"sd", out.sd}, {"f_mean", f.mean}, {"g_mean", gc.mean},
                {"f_sd", f.sd},     {"g_sd", gc.sd}};
      } else {
        cols = {{"mean", out.mean}, {"sd", out.sd}};
      }
      write_predictions(psv_out,
                        "thingp predict-sv config_hash=" + hex(fnv1a(kv.to_string())) +
                            " seed=" + std::to_string(model.seed),
                        cols);
      report_metrics(test, out);
    } else if (*fit_tw) {
      const Dataset ds = tw_data.load();
      tw_cfg.sizes_from_full = !tw_per_block;
      const std::size_t T = choose_T(ds, tw_thinned, tw_T, std::nullopt);
      const TwinEnsemble model = fit_twin(ds, partition(ds.n(), T), tw_cfg);
      KeyValueFile kv = to_kv(model, tw_cfg);
      stamp_data(kv, tw_data, ds);
      kv.write(tw_out);
      std::cout << "T = " << T << "\nn_g = " << model.sizes.n_g << "\nk_loc = "
                << model.sizes.k_loc << "\nn_val = " << model.sizes.n_val << '\n';
    } else if (*pred_tw) {
      const KeyValueFile kv = KeyValueFile::read(ptw_model);
      const Dataset train = reload_data(kv, ptw_data);
      const TwinEnsemble model = twin_model_from_kv(kv, train);
      const InputTable test = load_test(ptw_test, train, "", false);
      const EnsemblePrediction p = predict_twin(model, test.x);
      PredictionResult out;
      out.mean = p.mean;
      out.sd = p.sd;
      write_predictions(ptw_out,
                        "thingp predict-twin config_hash=" + hex(fnv1a(kv.to_string())) +
                            " seed=" + kv.get("seed"),
                        {{"mean", out.mean}, {"sd", out.sd}});
      report_metrics(test, out);
    } else if (*pred_la) {
      const Dataset train = la_data.load();
      const InputTable test = load_test(la_test, train, "", false);
      const std::size_t T = choose_T(train, la_thinned, la_T, std::nullopt);
      const PredictionResult out = predict_lagp(train, partition(train.n(), T), test.x, la_cfg);
      std::ostringstream cfg;
      cfg << "T=" << T << " n_start=" << la_cfg.n_start << " n_end=" << la_cfg.n_end
          << " candidates=" << la_cfg.candidates << " data=" << la_data.path;
      write_predictions(la_out,
                        "thingp predict-lagp config_hash=" + hex(fnv1a(cfg.str())) + " T=" +
                            std::to_string(T),
                        {{"mean", out.mean}, {"sd", out.sd}});
      std::cout << "T = " << T << '\n';
      report_metrics(test, out);
    } else if (*bench) {
      KeyValueFile kv;
      if (!bench_config.empty())
        kv = KeyValueFile::read(bench_config);
      if (!b_protocol.empty())
        kv.set("protocol", b_protocol);
      if (!b_methods.empty())
        kv.set("methods", b_methods);
      if (!b_seeds.empty())
        kv.set("seeds", b_seeds);
      if (!b_grid.empty())
        kv.set("T_grid", b_grid);
      if (b_M)
        kv.set("M", *b_M);
      if (b_ntrain)
        kv.set("n_train", *b_ntrain);
      if (b_ntest)
        kv.set("n_test", *b_ntest);
      if (b_reps)
        kv.set("replications", *b_reps);
      if (b_seed)
        kv.set("seed", *b_seed);
      const BenchConfig cfg = bench_config_from_kv(kv);
      std::filesystem::create_directories(bench_out);
      const MetricReport report = run_protocol(cfg);
      write_report(report, cfg, bench_out);
      std::cout << report_table(report);
    } else if (*sim) {
      const auto spec = default_arm_spec(s_M, s_seed, s_cal);
      const auto pair = simulate(spec, s_ntrain, s_ntest);
      std::filesystem::create_directories(s_out);
      std::ostringstream tag;
      tag << "thingp simulate M=" << s_M << " seed=" << s_seed << " spectral_radius="
          << format_double(s_cal.spectral_radius) << " psi_scale="
          << format_double(s_cal.psi_scale);
      write_csv(s_out + "/train.csv", pair.train, tag.str());
      if (s_ntest > 0)
        write_csv(s_out + "/test.csv", pair.test, tag.str());
      std::cout << "wrote " << s_out << "/train.csv";
      if (s_ntest > 0)
        std::cout << " and " << s_out << "/test.csv";
      std::cout << '\n';
    }
  } catch (const Error &e) {
    const char *kind = e.kind() == Error::Kind::Config ? "config"
                       : e.kind() == Error::Kind::Data ? "data"
                                                       : "numerical";
    std::cerr << "thingp: " << kind << " error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "thingp: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
