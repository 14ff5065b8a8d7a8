#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "parexp/ate_calculus.hpp"
#include "parexp/diagnostics.hpp"
#include "parexp/estimators.hpp"
#include "parexp/pipeline.hpp"
#include "parexp/randomize.hpp"
#include "parexp/scenarios.hpp"

namespace py = pybind11;
using namespace parexp;

namespace {

Method parse_method(const std::string& name) {
  if (name == "cells") return Method::cells;
  if (name == "kernel") return Method::kernel;
  if (name == "interaction") return Method::interaction;
  throw ConfigError("unknown method '" + name + "' (expected cells, kernel or interaction)");
}

py::dict estimate_dict(const CellEstimate& e) {
  py::dict d;
  d["alpha"] = e.alpha;
  d["tau"] = e.tau;
  d["se_alpha"] = e.se_alpha;
  d["se_tau"] = e.se_tau;
  d["n_test"] = e.n_test;
  d["n_control"] = e.n_control;
  d["flag"] = to_string(e.flag);
  return d;
}

std::vector<Arm> to_arms(const std::vector<bool>& test) {
  std::vector<Arm> arms;
  arms.reserve(test.size());
  for (bool t : test) arms.push_back(t ? Arm::test : Arm::control);
  return arms;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Estimation of average treatment effects under parallel advertiser experiments";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IdentificationError>(m, "IdentificationError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "assign",
      [](std::uint64_t user, std::uint64_t campaign, std::uint64_t seed, double share) {
        return assign(user, campaign, SplitSeed{seed}, share) == Arm::test;
      },
      py::arg("user"), py::arg("campaign"), py::arg("seed"), py::arg("share"),
      "True when the user falls in the campaign's test arm.");

  m.def(
      "split_uniform",
      [](std::uint64_t user, std::uint64_t campaign, std::uint64_t seed) {
        return split_uniform(user, campaign, SplitSeed{seed});
      },
      py::arg("user"), py::arg("campaign"), py::arg("seed"));

  m.def(
      "cell_ols",
      [](const std::vector<double>& test, const std::vector<double>& control, std::size_t min_per_arm) {
        return estimate_dict(cell_ols(test, control, min_per_arm));
      },
      py::arg("test"), py::arg("control"), py::arg("min_per_arm") = 2);

  m.def(
      "interaction_ols",
      [](const std::vector<std::uint8_t>& dj, const std::vector<std::uint8_t>& dk, const std::vector<double>& y) {
        const InteractionFit fit = interaction_ols(dj, dk, y);
        py::dict d;
        d["coef"] = fit.coef;
        d["se"] = fit.se;
        d["p_value"] = fit.p_value;
        d["counts"] = fit.counts;
        return d;
      },
      py::arg("dj"), py::arg("dk"), py::arg("y"),
      "OLS of y on [1, dj, dk, dj*dk] with HC0 standard errors.");

  m.def("mix_sigma", &mix_sigma, py::arg("tau0"), py::arg("tau1"), py::arg("sigma"));

  m.def(
      "proportion_test",
      [](const std::vector<bool>& test, double target) { return proportion_test(to_arms(test), target); },
      py::arg("test"), py::arg("target"));

  m.def(
      "balance_test",
      [](const std::vector<std::vector<double>>& covariates, const std::vector<bool>& test,
         const std::vector<std::string>& names) { return balance_test(covariates, to_arms(test), names); },
      py::arg("covariates"), py::arg("test"), py::arg("names") = std::vector<std::string>{});

  m.def(
      "ks_uniformity",
      [](const std::vector<double>& values) {
        const KsResult r = ks_uniformity(values);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("values"), "Kolmogorov-Smirnov statistic and p-value against U(0, 1).");

  m.def(
      "simulate",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
         unsigned threads, bool compress, bool oracle) {
        SimulateArgs a;
        a.config = config;
        a.out = out;
        a.seed = seed;
        a.threads = threads;
        a.compress = compress;
        a.oracle = oracle;
        py::gil_scoped_release release;
        return run_simulate(a);
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      py::arg("compress") = false, py::arg("oracle") = true, "Returns the manifest path.");

  m.def(
      "estimate",
      [](const std::filesystem::path& in, const std::filesystem::path& out, CampaignIndex focal,
         const std::string& method, double split, std::size_t min_cell, std::optional<double> lambda,
         CampaignIndex rival, bool all_users, std::uint64_t seed, unsigned threads) {
        EstimateArgs a;
        a.in = in;
        a.out = out;
        a.focal = focal;
        a.options.method = parse_method(method);
        a.options.split = split;
        a.options.min_cell = min_cell;
        a.options.lambda = lambda;
        a.options.rival = rival;
        a.options.all_users = all_users;
        a.options.seed = seed;
        a.options.threads = threads;
        py::gil_scoped_release release;
        return run_estimate(a);
      },
      py::arg("in_dir"), py::arg("out"), py::arg("focal") = 0, py::arg("method") = "cells", py::arg("split") = 0.1,
      py::arg("min_cell") = 2, py::arg("lam") = py::none(), py::arg("rival") = 0, py::arg("all_users") = false,
      py::arg("seed") = 1, py::arg("threads") = 1, "Returns the manifest path. focal=0 estimates every campaign.");

  m.def(
      "calculus",
      [](const std::filesystem::path& in, const std::filesystem::path& table, const std::filesystem::path& out,
         CampaignIndex focal, std::optional<std::filesystem::path> beliefs, int partition, CampaignIndex rival,
         double sigma, std::size_t grid) {
        CalculusArgs a;
        a.in = in;
        a.table = table;
        a.out = out;
        a.focal = focal;
        a.beliefs = beliefs;
        a.partition = partition;
        a.rival = rival;
        a.sigma = sigma;
        a.grid = grid;
        py::gil_scoped_release release;
        return run_calculus(a);
      },
      py::arg("in_dir"), py::arg("table"), py::arg("out"), py::arg("focal"), py::arg("beliefs") = py::none(),
      py::arg("partition") = 0, py::arg("rival") = 0, py::arg("sigma") = 0.7, py::arg("grid") = 21);

  m.def(
      "diagnose",
      [](const std::filesystem::path& in, const std::filesystem::path& out,
         std::optional<std::filesystem::path> config, double target) {
        DiagnoseArgs a;
        a.in = in;
        a.out = out;
        a.config = config;
        a.target = target;
        py::gil_scoped_release release;
        return run_diagnose(a);
      },
      py::arg("in_dir"), py::arg("out"), py::arg("config") = py::none(), py::arg("target") = 0.7);

  m.def("scenario_names", &scenario_names);

  m.def(
      "replicate",
      [](const std::string& name, const std::filesystem::path& out, std::uint64_t seed, unsigned threads) {
        ScenarioReport r;
        {
          py::gil_scoped_release release;
          r = replicate(name, out, seed, threads);
        }
        return py::make_tuple(r.passed(), r.text());
      },
      py::arg("name"), py::arg("out"), py::arg("seed") = 1, py::arg("threads") = 1,
      "Runs a built-in scenario; returns (passed, report text).");
}
