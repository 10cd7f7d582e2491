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
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thingp/bench.hpp"
#include "thingp/blockmodels.hpp"
#include "thingp/dataset.hpp"
#include "thingp/simulate.hpp"
#include "thingp/temporal.hpp"
#include "thingp/thinning.hpp"
#include "thingp/vecchia.hpp"

namespace py = pybind11;
using namespace thingp;

PYBIND11_MODULE(_thingp, m) {
  m.doc() = "Thinned Gaussian-process approximations for autocorrelated data";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("x", &Dataset::x)
      .def_readonly("y", &Dataset::y)
      .def_readonly("t", &Dataset::t)
      .def_readonly("covariate_names", &Dataset::covariate_names)
      .def_readonly("response_name", &Dataset::response_name)
      .def_readonly("time_ranked", &Dataset::time_ranked)
      .def_property_readonly("n", &Dataset::n)
      .def_property_readonly("d", &Dataset::d)
      .def("rows", &Dataset::rows);
  m.def("make_dataset", &make_dataset, py::arg("x"), py::arg("y"), py::arg("t") = Vector(),
        py::arg("covariate_names") = std::vector<std::string>());
  m.def(
      "load_csv",
      [](const std::string &path, const std::string &response,
         std::optional<std::string> time, std::vector<std::string> covariates) {
        CsvSchema s;
        s.response = response;
        s.time = std::move(time);
        s.covariates = std::move(covariates);
        return load_csv(path, s);
      },
      py::arg("path"), py::arg("response"), py::arg("time") = py::none(),
      py::arg("covariates") = std::vector<std::string>());

  py::class_<ThinningChoice>(m, "ThinningChoice")
      .def_readonly("T", &ThinningChoice::T)
      .def_readonly("threshold", &ThinningChoice::threshold)
      .def_readonly("binding_series", &ThinningChoice::binding_series)
      .def_readonly("binding_lag", &ThinningChoice::binding_lag)
      .def_readonly("saturated", &ThinningChoice::saturated);
  m.def("pacf", &pacf, py::arg("series"), py::arg("h_max"));
  m.def(
      "select_thinning_number",
      [](const Dataset &ds, bool include_y, std::size_t h_max, std::optional<double> threshold) {
        ThinningOptions o;
        o.include_y = include_y;
        o.h_max = h_max;
        o.threshold = threshold;
        return select_thinning_number(ds, o);
      },
      py::arg("data"), py::arg("include_y") = true, py::arg("h_max") = 100,
      py::arg("threshold") = py::none());
  py::class_<BlockPartition>(m, "BlockPartition")
      .def_readonly("T", &BlockPartition::T)
      .def_readonly("blocks", &BlockPartition::blocks)
      .def("smallest_block", &BlockPartition::smallest_block);
  m.def("partition", &partition, py::arg("n"), py::arg("T"));
  m.def("max_thinning_for", &max_thinning_for, py::arg("n"), py::arg("m"));

  py::class_<PredictionResult>(m, "PredictionResult")
      .def(py::init<>())
      .def_readwrite("mean", &PredictionResult::mean)
      .def_readwrite("sd", &PredictionResult::sd);

  py::class_<Hyperparameters>(m, "Hyperparameters")
      .def_readonly("lengthscales", &Hyperparameters::lengthscales)
      .def_readonly("signal_var", &Hyperparameters::signal_var)
      .def_readonly("nugget", &Hyperparameters::nugget);

  py::class_<VecchiaConfig>(m, "VecchiaConfig")
      .def(py::init<>())
      .def_readwrite("m", &VecchiaConfig::m)
      .def_readwrite("m_p", &VecchiaConfig::m_p)
      .def_readwrite("max_iter", &VecchiaConfig::max_iter)
      .def_readwrite("seed", &VecchiaConfig::seed)
      .def_readwrite("include_time", &VecchiaConfig::include_time)
      .def_property(
          "kernel", [](const VecchiaConfig &c) { return to_string(c.kernel.family); },
          [](VecchiaConfig &c, const std::string &k) {
            c.kernel.family = kernel_family_from_string(k);
          });
  py::class_<VecchiaModel>(m, "VecchiaModel")
      .def_readonly("hp", &VecchiaModel::hp)
      .def_readonly("T", &VecchiaModel::T)
      .def_readonly("m", &VecchiaModel::m)
      .def_readonly("m_p", &VecchiaModel::m_p)
      .def_readonly("seed", &VecchiaModel::seed)
      .def_readonly("include_time", &VecchiaModel::include_time)
      .def_readonly("loglik", &VecchiaModel::loglik)
      .def("dumps", [](const VecchiaModel &mod) { return to_kv(mod).to_string(); })
      .def_static("loads", [](const std::string &text) {
        return vecchia_model_from_kv(KeyValueFile::parse(text));
      });
  py::class_<FitReport>(m, "FitReport")
      .def_readonly("loglik", &FitReport::loglik)
      .def_readonly("iterations", &FitReport::iterations)
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("loglik_trace", &FitReport::loglik_trace);
  m.def("fit_vecchia", &fit_vecchia, py::arg("train"), py::arg("partition"),
        py::arg("config") = VecchiaConfig(), py::call_guard<py::gil_scoped_release>());
  m.def("predict_vecchia", &predict_vecchia, py::arg("model"), py::arg("train"),
        py::arg("test_x"), py::arg("test_t"), py::arg("m_p"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("fitted_training_values", &fitted_training_values, py::arg("model"), py::arg("train"),
        py::arg("k"));

  py::class_<ResidualSeries>(m, "ResidualSeries")
      .def(py::init([](Vector t, Vector r) {
             ResidualSeries s{std::move(t), std::move(r)};
             s.validate();
             return s;
           }),
           py::arg("t"), py::arg("r"))
      .def_readonly("t", &ResidualSeries::t)
      .def_readonly("r", &ResidualSeries::r);
  py::class_<TemporalModel>(m, "TemporalModel")
      .def_readonly("hp", &TemporalModel::hp)
      .def_readonly("T", &TemporalModel::T)
      .def_readonly("degenerate", &TemporalModel::degenerate)
      .def("signal_to_nugget", &TemporalModel::signal_to_nugget);
  py::class_<TemporalPrediction>(m, "TemporalPrediction")
      .def_readonly("pred", &TemporalPrediction::pred)
      .def_readonly("window_size", &TemporalPrediction::window_size);
  m.def(
      "fit_g",
      [](const ResidualSeries &res, std::size_t T) { return fit_g(res, T); }, py::arg("residuals"),
      py::arg("T"));
  m.def("predict_g", &predict_g, py::arg("model"), py::arg("residuals"), py::arg("t_star"));
  m.def("g_contribution", &g_contribution, py::arg("g"));
  m.def("combine", &combine, py::arg("f"), py::arg("g"));

  py::class_<EnsemblePrediction>(m, "EnsemblePrediction")
      .def_readonly("block_mean", &EnsemblePrediction::block_mean)
      .def_readonly("block_sd", &EnsemblePrediction::block_sd)
      .def_readonly("mean", &EnsemblePrediction::mean)
      .def_readonly("sd", &EnsemblePrediction::sd);
  m.def("ensemble_predict", &ensemble_predict, py::arg("block_mean"), py::arg("block_sd"));

  py::class_<TwinSizes>(m, "TwinSizes")
      .def_readonly("n_g", &TwinSizes::n_g)
      .def_readonly("k_loc", &TwinSizes::k_loc)
      .def_readonly("n_val", &TwinSizes::n_val);
  m.def("default_twin_sizes", &default_twin_sizes, py::arg("n"), py::arg("d"));
  py::class_<TwinConfig>(m, "TwinConfig")
      .def(py::init<>())
      .def_readwrite("n_g", &TwinConfig::n_g)
      .def_readwrite("k_loc", &TwinConfig::k_loc)
      .def_readwrite("n_val", &TwinConfig::n_val)
      .def_readwrite("sizes_from_full", &TwinConfig::sizes_from_full)
      .def_readwrite("seed", &TwinConfig::seed);
  py::class_<TwinEnsemble>(m, "TwinEnsemble")
      .def_readonly("T", &TwinEnsemble::T)
      .def_readonly("sizes", &TwinEnsemble::sizes)
      .def_property_readonly("lambdas", [](const TwinEnsemble &e) {
        std::vector<double> out;
        for (const auto &b : e.blocks)
          out.push_back(b.blend().lambda);
        return out;
      });
  m.def("fit_twin", &fit_twin, py::arg("train"), py::arg("partition"),
        py::arg("config") = TwinConfig(), py::call_guard<py::gil_scoped_release>());
  m.def("predict_twin", &predict_twin, py::arg("model"), py::arg("test_x"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<LagpConfig>(m, "LagpConfig")
      .def(py::init<>())
      .def_readwrite("n_start", &LagpConfig::n_start)
      .def_readwrite("n_end", &LagpConfig::n_end)
      .def_readwrite("candidates", &LagpConfig::candidates);
  m.def(
      "predict_lagp",
      [](const Dataset &train, const BlockPartition &part, const RowMatrix &test_x,
         const LagpConfig &cfg) { return predict_lagp(train, part, test_x, cfg); },
      py::arg("train"), py::arg("partition"),
        py::arg("test_x"), py::arg("config") = LagpConfig(),
        py::call_guard<py::gil_scoped_release>());

  py::class_<ArCalibration>(m, "ArCalibration")
      .def(py::init<>())
      .def_readwrite("spectral_radius", &ArCalibration::spectral_radius)
      .def_readwrite("psi_scale", &ArCalibration::psi_scale)
      .def_readwrite("innovation_sd", &ArCalibration::innovation_sd)
      .def_readwrite("noise_sd", &ArCalibration::noise_sd);
  py::class_<ArmArSpec>(m, "ArmArSpec")
      .def_readonly("M", &ArmArSpec::M)
      .def_readonly("phi", &ArmArSpec::phi)
      .def_readonly("psi", &ArmArSpec::psi);
  m.def("default_arm_spec", &default_arm_spec, py::arg("M"), py::arg("seed"),
        py::arg("calibration") = ArCalibration());
  m.def(
      "simulate",
      [](const ArmArSpec &spec, std::size_t n_train, std::size_t n_test) {
        auto p = simulate(spec, n_train, n_test);
        return py::make_tuple(p.train, p.test);
      },
      py::arg("spec"), py::arg("n_train"), py::arg("n_test"));
  m.def("robot_arm", &robot_arm, py::arg("angles"), py::arg("lengths"));
  m.def("rmse", &rmse, py::arg("y_true"), py::arg("y_pred"));
  m.def("nlpd", &nlpd, py::arg("y_true"), py::arg("mean"), py::arg("sd"));
}
