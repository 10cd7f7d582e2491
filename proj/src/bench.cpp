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
#include "thingp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "thingp/temporal.hpp"
#include "thingp/thinning.hpp"

namespace thingp {

std::string to_string(Protocol p) {
  switch (p) {
  case Protocol::Replication:
    return "replication";
  case Protocol::ThinningSweep:
    return "thinning-sweep";
  case Protocol::Stability:
    return "stability";
  }
  return "replication";
}

Protocol protocol_from_string(const std::string &name) {
  if (name == "replication")
    return Protocol::Replication;
  if (name == "thinning-sweep" || name == "sweep")
    return Protocol::ThinningSweep;
  if (name == "stability")
    return Protocol::Stability;
  throw ConfigError("unknown protocol '" + name +
                    "' (expected replication, thinning-sweep or stability)");
}

const std::vector<std::string> &bench_methods() {
  static const std::vector<std::string> names = {
      "sv", "sv-xt", "thinned-sv", "twin", "thinned-twin", "lagp", "thinned-lagp"};
  return names;
}

namespace {

bool is_thinned(const std::string &method) { return method.rfind("thinned-", 0) == 0; }

void check_method(const std::string &method) {
  const auto &all = bench_methods();
  if (std::find(all.begin(), all.end(), method) == all.end()) {
    std::string list;
    for (const auto &m : all)
      list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("unknown method '" + method + "' (expected one of " + list + ")");
  }
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

std::size_t parse_size(const std::string &text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0)
      throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception &) {
    throw ConfigError("expected a non-negative integer, got '" + text + "'");
  }
}

std::string join_sizes(const std::vector<std::size_t> &v) {
  std::string out;
  for (auto x : v)
    out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

std::vector<std::size_t> parse_index_list(const std::string &text) {
  std::vector<std::size_t> out;
  for (const auto &item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_size(item));
      continue;
    }
    const std::size_t lo = parse_size(trim(item.substr(0, dots)));
    std::string rest = item.substr(dots + 2);
    std::size_t step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = parse_size(trim(rest.substr(colon + 1)));
      rest = rest.substr(0, colon);
    }
    const std::size_t hi = parse_size(trim(rest));
    if (step == 0 || hi < lo)
      throw ConfigError("invalid range '" + item + "'");
    for (std::size_t v = lo; v <= hi; v += step)
      out.push_back(v);
  }
  return out;
}

KeyValueFile BenchConfig::to_kv() const {
  KeyValueFile kv;
  kv.set("protocol", to_string(protocol));
  std::string ms;
  for (const auto &m : methods)
    ms += (ms.empty() ? "" : ",") + m;
  kv.set("methods", ms);
  kv.set("M", M);
  kv.set("n_train", n_train);
  kv.set("n_test", n_test);
  kv.set("replications", replications);
  kv.set("seed", static_cast<std::size_t>(seed));
  std::vector<std::size_t> sd(seeds.begin(), seeds.end());
  kv.set("seeds", join_sizes(sd));
  kv.set("T_grid", join_sizes(T_grid));
  kv.set("T", T ? std::to_string(*T) : std::string("auto"));
  kv.set("m", m);
  kv.set("m_p", m_p);
  kv.set("spectral_radius", calibration.spectral_radius);
  kv.set("psi_scale", calibration.psi_scale);
  kv.set("innovation_sd", calibration.innovation_sd);
  kv.set("noise_sd", calibration.noise_sd);
  kv.set("with_g", with_g);
  kv.set("twin.n_g", twin.n_g ? std::to_string(*twin.n_g) : std::string("auto"));
  kv.set("twin.k_loc", twin.k_loc ? std::to_string(*twin.k_loc) : std::string("auto"));
  kv.set("twin.n_val", twin.n_val ? std::to_string(*twin.n_val) : std::string("auto"));
  kv.set("lagp.n_start", lagp.n_start);
  kv.set("lagp.n_end", lagp.n_end);
  kv.set("lagp.candidates", lagp.candidates);
  return kv;
}

std::uint64_t BenchConfig::hash() const { return fnv1a(to_kv().to_string()); }

BenchConfig bench_config_from_kv(const KeyValueFile &kv) {
  BenchConfig cfg;
  auto optional_size = [](const std::string &v) -> std::optional<std::size_t> {
    if (v == "auto" || v.empty())
      return std::nullopt;
    return parse_size(v);
  };
  for (const auto &[key, value] : kv.entries()) {
    if (key == "protocol")
      cfg.protocol = protocol_from_string(value);
    else if (key == "methods")
      cfg.methods = split_list(value);
    else if (key == "M")
      cfg.M = kv.get_size(key);
    else if (key == "n_train")
      cfg.n_train = kv.get_size(key);
    else if (key == "n_test")
      cfg.n_test = kv.get_size(key);
    else if (key == "replications")
      cfg.replications = kv.get_size(key);
    else if (key == "seed")
      cfg.seed = kv.get_size(key);
    else if (key == "seeds") {
      const auto s = parse_index_list(value);
      cfg.seeds.assign(s.begin(), s.end());
    } else if (key == "T_grid")
      cfg.T_grid = parse_index_list(value);
    else if (key == "T")
      cfg.T = optional_size(value);
    else if (key == "m")
      cfg.m = kv.get_size(key);
    else if (key == "m_p")
      cfg.m_p = kv.get_size(key);
    else if (key == "spectral_radius")
      cfg.calibration.spectral_radius = kv.get_double(key);
    else if (key == "psi_scale")
      cfg.calibration.psi_scale = kv.get_double(key);
    else if (key == "innovation_sd")
      cfg.calibration.innovation_sd = kv.get_double(key);
    else if (key == "noise_sd")
      cfg.calibration.noise_sd = kv.get_double(key);
    else if (key == "with_g")
      cfg.with_g = kv.get_bool(key);
    else if (key == "twin.n_g")
      cfg.twin.n_g = optional_size(value);
    else if (key == "twin.k_loc")
      cfg.twin.k_loc = optional_size(value);
    else if (key == "twin.n_val")
      cfg.twin.n_val = optional_size(value);
    else if (key == "lagp.n_start")
      cfg.lagp.n_start = kv.get_size(key);
    else if (key == "lagp.n_end")
      cfg.lagp.n_end = kv.get_size(key);
    else if (key == "lagp.candidates")
      cfg.lagp.candidates = kv.get_size(key);
    else
      throw ConfigError("unknown bench key '" + key + "'");
  }
  for (const auto &m : cfg.methods)
    check_method(m);
  if (cfg.m < 1 || cfg.m_p < 1)
    throw ConfigError("m and m_p must be >= 1");
  return cfg;
}

std::string scenario_tag(const BenchConfig &cfg) {
  return cfg.M == 0 ? "arm-lhs" : "arm-M" + std::to_string(cfg.M);
}

std::size_t bench_thinning_number(const Dataset &train, const BenchConfig &cfg) {
  std::size_t T = cfg.T ? *cfg.T : select_thinning_number(train).T;
  const std::size_t cap = train.n() > cfg.m ? max_thinning_for(train.n(), cfg.m) : 1;
  if (T > cap) {
    log::warn("thinning number " + std::to_string(T) + " capped at " + std::to_string(cap) +
              " by the block size law");
    T = cap;
  }
  return std::max<std::size_t>(T, 1);
}

MethodResult run_method(const std::string &method, const Dataset &train,
                        const Dataset &test, const BenchConfig &cfg,
                        std::uint64_t model_seed, std::optional<std::size_t> T_override) {
  check_method(method);
  const auto start = std::chrono::steady_clock::now();
  MethodResult out;
  if (is_thinned(method))
    out.T = T_override ? *T_override : bench_thinning_number(train, cfg);
  const BlockPartition part = partition(train.n(), out.T);

  if (method == "sv" || method == "sv-xt" || method == "thinned-sv") {
    VecchiaConfig vc = cfg.vecchia_template;
    vc.m = cfg.m;
    vc.m_p = cfg.m_p;
    vc.seed = model_seed;
    vc.include_time = method == "sv-xt";
    const auto [model, report] = fit_vecchia(train, part, vc);
    out.pred = predict_vecchia(model, train, test.x, test.t, cfg.m_p,
                               derive_seed(model_seed, "prediction"));
    if (cfg.with_g && method == "thinned-sv") {
      ResidualSeries res;
      res.t = train.t;
      res.r = train.y - fitted_training_values(model, train, cfg.m);
      const TemporalModel g = fit_g(res, out.T);
      out.pred = combine(out.pred, g_contribution(predict_g(g, res, test.t)));
    }
  } else if (method == "twin" || method == "thinned-twin") {
    TwinConfig tc = cfg.twin;
    tc.seed = model_seed;
    const TwinEnsemble model = fit_twin(train, part, tc);
    const EnsemblePrediction p = predict_twin(model, test.x);
    out.pred.mean = p.mean;
    out.pred.sd = p.sd;
  } else {
    out.pred = predict_lagp(train, part, test.x, cfg.lagp);
  }
  out.runtime_s = seconds_since(start);
  return out;
}

namespace {

SimulatedPair scenario_data(const BenchConfig &cfg, std::uint64_t data_seed) {
  return simulate(default_arm_spec(cfg.M, data_seed, cfg.calibration), cfg.n_train, cfg.n_test);
}

MetricRow score(const BenchConfig &cfg, const std::string &method, const Dataset &test,
                const MethodResult &res) {
  MetricRow row;
  row.scenario = scenario_tag(cfg);
  row.method = method;
  row.T = res.T;
  row.rmse = rmse(test.y, res.pred.mean);
  if (res.pred.sd.size() == test.y.size())
    row.nlpd = nlpd(test.y, res.pred.mean, res.pred.sd);
  row.runtime_s = res.runtime_s;
  return row;
}

void mark_sweep(std::vector<MetricRow> &rows) {
  std::map<std::string, std::vector<std::size_t>> by_method;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].T == 1)
      rows[i].mark = "baseline";
    else
      by_method[rows[i].method].push_back(i);
  }
  for (auto &[method, idx] : by_method) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return rows[a].rmse < rows[b].rmse; });
    const std::size_t top = std::min<std::size_t>(25, idx.size() / 2);
    const std::size_t bottom = std::min<std::size_t>(25, idx.size() - top);
    for (std::size_t k = 0; k < top; ++k)
      rows[idx[k]].mark = "top25";
    for (std::size_t k = 0; k < bottom; ++k)
      rows[idx[idx.size() - 1 - k]].mark = "bottom25";
  }
}

} // namespace

MetricReport run_protocol(const BenchConfig &cfg) {
  for (const auto &m : cfg.methods)
    check_method(m);
  MetricReport report;
  report.protocol = cfg.protocol;
  report.config_hash = cfg.hash();
  report.seed = cfg.seed;
  if (cfg.methods.empty())
    return report;

  switch (cfg.protocol) {
  case Protocol::Replication:
    for (std::size_t r = 0; r < cfg.replications; ++r) {
      const auto data = scenario_data(cfg, derive_seed(cfg.seed, "replication", r));
      for (const auto &method : cfg.methods) {
        const auto res = run_method(method, data.train, data.test, cfg,
                                    derive_seed(cfg.seed, "model", r));
        MetricRow row = score(cfg, method, data.test, res);
        row.replication = r;
        row.seed = cfg.seed;
        report.rows.push_back(std::move(row));
        log::info(method + " replication " + std::to_string(r) + ": rmse " +
                  format_double(report.rows.back().rmse));
      }
    }
    break;
  case Protocol::ThinningSweep: {
    if (cfg.T_grid.empty())
      throw ConfigError("thinning sweep needs a non-empty T_grid");
    for (const auto &method : cfg.methods)
      if (!is_thinned(method))
        throw ConfigError("thinning sweep runs thinned methods only; got '" + method + "'");
    const auto data = scenario_data(cfg, derive_seed(cfg.seed, "sweep"));
    for (const auto &method : cfg.methods)
      for (std::size_t T : cfg.T_grid) {
        if (T == 0)
          throw ConfigError("thinning numbers must be >= 1");
        const auto res = run_method(method, data.train, data.test, cfg, cfg.seed, T);
        MetricRow row = score(cfg, method, data.test, res);
        row.seed = cfg.seed;
        report.rows.push_back(std::move(row));
        log::info(method + " T = " + std::to_string(T) + ": rmse " +
                  format_double(report.rows.back().rmse));
      }
    mark_sweep(report.rows);
    break;
  }
  case Protocol::Stability: {
    if (cfg.seeds.empty())
      throw ConfigError("stability protocol needs at least one seed");
    const auto data = scenario_data(cfg, derive_seed(cfg.seed, "stability-data"));
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k)
      for (const auto &method : cfg.methods) {
        const auto res = run_method(method, data.train, data.test, cfg, cfg.seeds[k]);
        MetricRow row = score(cfg, method, data.test, res);
        row.replication = k;
        row.seed = cfg.seeds[k];
        report.rows.push_back(std::move(row));
        log::info(method + " seed " + std::to_string(cfg.seeds[k]) + ": rmse " +
                  format_double(report.rows.back().rmse));
      }
    break;
  }
  }
  return report;
}

namespace {

std::vector<std::string> methods_in(const MetricReport &report) {
  std::vector<std::string> out;
  for (const auto &r : report.rows)
    if (std::find(out.begin(), out.end(), r.method) == out.end())
      out.push_back(r.method);
  return out;
}

std::pair<double, double> mean_sd(const std::vector<double> &v) {
  if (v.empty())
    return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2)
    return {mean, 0.0};
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace

std::string report_csv(const MetricReport &report) {
  std::ostringstream out;
  out << "# thingp bench protocol=" << to_string(report.protocol)
      << " config_hash=" << hex(report.config_hash) << " seed=" << report.seed << '\n';
  out << "scenario,method,replication,seed,T,rmse,nlpd,mark\n";
  for (const auto &r : report.rows)
    out << r.scenario << ',' << r.method << ',' << r.replication << ',' << r.seed << ','
        << r.T << ',' << format_double(r.rmse) << ','
        << (r.nlpd ? format_double(*r.nlpd) : std::string()) << ',' << r.mark << '\n';
  return out.str();
}

std::string report_table(const MetricReport &report) {
  std::ostringstream out;
  const auto methods = methods_in(report);
  out << "# " << to_string(report.protocol) << " (config " << hex(report.config_hash)
      << ", seed " << report.seed << ")\n\n";
  if (methods.empty()) {
    out << "No methods were run.\n";
    return out.str();
  }
  switch (report.protocol) {
  case Protocol::Replication:
    out << "| scenario | method | runs | T | RMSE | NLPD |\n|---|---|---|---|---|---|\n";
    for (const auto &m : methods) {
      std::vector<double> rm, nl;
      std::set<std::size_t> Ts;
      std::string scenario;
      for (const auto &r : report.rows)
        if (r.method == m) {
          scenario = r.scenario;
          rm.push_back(r.rmse);
          if (r.nlpd)
            nl.push_back(*r.nlpd);
          Ts.insert(r.T);
        }
      std::string Tl;
      for (auto T : Ts)
        Tl += (Tl.empty() ? "" : "/") + std::to_string(T);
      const auto [rmu, rsd] = mean_sd(rm);
      out << "| " << scenario << " | " << m << " | " << rm.size() << " | " << Tl << " | "
          << fixed(rmu) << " ± " << fixed(rsd) << " | ";
      if (nl.size() == rm.size()) {
        const auto [nmu, nsd] = mean_sd(nl);
        out << fixed(nmu) << " ± " << fixed(nsd);
      } else {
        out << "n/a";
      }
      out << " |\n";
    }
    break;
  case Protocol::ThinningSweep:
    out << "| method | T | RMSE | mark |\n|---|---|---|---|\n";
    for (const auto &r : report.rows)
      out << "| " << r.method << " | " << r.T << " | " << fixed(r.rmse) << " | "
          << (r.mark == "baseline" ? "baseline (no thinning)" : r.mark) << " |\n";
    break;
  case Protocol::Stability: {
    out << "| seed |";
    for (const auto &m : methods)
      out << ' ' << m << " |";
    out << "\n|---|";
    for (std::size_t k = 0; k < methods.size(); ++k)
      out << "---|";
    out << '\n';
    std::vector<std::uint64_t> seeds;
    for (const auto &r : report.rows)
      if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end())
        seeds.push_back(r.seed);
    for (auto s : seeds) {
      out << "| " << s << " |";
      for (const auto &m : methods)
        for (const auto &r : report.rows)
          if (r.method == m && r.seed == s)
            out << ' ' << fixed(r.rmse) << " |";
      out << '\n';
    }
    out << "| spread (max-min)/mean |";
    for (const auto &m : methods)
      out << ' ' << fixed(rmse_spread(report, m), 6) << " |";
    out << '\n';
    break;
  }
  }
  return out.str();
}

std::string report_svg(const MetricReport &report) {
  const double W = 640, H = 400, L = 60, R = 20, Tm = 20, B = 50;
  const bool sweep = report.protocol == Protocol::ThinningSweep;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (report.rows.empty()) {
    out << "</svg>\n";
    return out.str();
  }
  auto xval = [&](const MetricRow &r) {
    return sweep ? static_cast<double>(r.T) : static_cast<double>(r.seed);
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto &r : report.rows) {
    x0 = std::min(x0, xval(r));
    x1 = std::max(x1, xval(r));
    y0 = std::min(y0, r.rmse);
    y1 = std::max(y1, r.rmse);
  }
  if (x1 == x0)
    x1 = x0 + 1;
  if (y1 == y0)
    y1 = y0 + 1e-9 + 1e-3 * std::abs(y0);
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - Tm - B); };
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << fixed(xv, 0) << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fixed(yv, 3) << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
      << (sweep ? "thinning number T" : "seed") << "</text>\n";
  out << "<text x=\"15\" y=\"" << (Tm + H - B) / 2 << "\" transform=\"rotate(-90 15 "
      << (Tm + H - B) / 2 << ")\" text-anchor=\"middle\">RMSE</text>\n";
  const char *palette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                           "#bcbd22"};
  const auto methods = methods_in(report);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const char *color = palette[k % 7];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto &r : report.rows)
      if (r.method == methods[k])
        out << px(xval(r)) << ',' << py(r.rmse) << ' ';
    out << "\"/>\n";
    for (const auto &r : report.rows) {
      if (r.method != methods[k])
        continue;
      const char *fill = r.mark == "baseline" ? "red"
                         : r.mark == "top25"  ? color
                         : r.mark == "bottom25" ? "white"
                                                : color;
      out << "<circle cx=\"" << px(xval(r)) << "\" cy=\"" << py(r.rmse) << "\" r=\""
          << (r.mark == "baseline" ? 5 : 3) << "\" fill=\"" << fill << "\" stroke=\"" << color
          << "\"/>\n";
    }
    out << "<text x=\"" << W - R - 140 << "\" y=\"" << Tm + 14 * (k + 1) << "\" fill=\"" << color
        << "\">" << methods[k] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_report(const MetricReport &report, const BenchConfig &cfg, const std::string &dir) {
  auto write = [&](const std::string &name, const std::string &text) {
    const std::string path = dir + "/" + name;
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw ConfigError("cannot write " + path);
    f << text;
  };
  write("results.csv", report_csv(report));
  write("table.md", report_table(report));
  if (report.protocol == Protocol::ThinningSweep)
    write("sweep.svg", report_svg(report));
  else if (report.protocol == Protocol::Stability)
    write("stability.svg", report_svg(report));
  std::ostringstream timing;
  timing << "# runtime seconds (fit + predict); not part of results.csv\n";
  timing << "# config:\n";
  const KeyValueFile kv = cfg.to_kv();
  for (const auto &[k, v] : kv.entries())
    timing << "#   " << k << " = " << v << '\n';
  timing << "method,replication,seed,T,runtime_s\n";
  for (const auto &r : report.rows)
    timing << r.method << ',' << r.replication << ',' << r.seed << ',' << r.T << ','
           << fixed(r.runtime_s, 3) << '\n';
  write("timing.log", timing.str());
}

double rmse_spread(const MetricReport &report, const std::string &method) {
  std::vector<double> v;
  for (const auto &r : report.rows)
    if (r.method == method)
      v.push_back(r.rmse);
  if (v.empty())
    return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return (*hi - *lo) / mean;
}

double mean_rmse(const MetricReport &report, const std::string &method, std::size_t T_lo,
                 std::size_t T_hi) {
  double s = 0.0;
  std::size_t k = 0;
  for (const auto &r : report.rows)
    if (r.method == method && r.T >= T_lo && r.T <= T_hi) {
      s += r.rmse;
      ++k;
    }
  if (k == 0)
    throw ConfigError("no " + method + " rows in the requested T range");
  return s / static_cast<double>(k);
}

} // namespace thingp
