#include "hetmean/app/config.hpp"
#include "hetmean/estimators.hpp"
#include "hetmean/simulate.hpp"
#include "hetmean/theory.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hetmean;

namespace {

Sample
to_sample(const std::vector<double>& values)
{
  return Sample::ingest(values);
}

SigmaProfile
to_profile(std::vector<double> sigmas)
{
  return SigmaProfile(std::move(sigmas));
}

py::dict
record_dict(const TrialRecord& r)
{
  py::dict d;
  d["trial"] = r.trial_index;
  d["seed"] = r.seed;
  for (const auto e : all_estimators)
    d[py::str("err_" + std::string(to_string(e)))] = r.error(e);
  d["covered"] = r.covered_by_median_interval;
  d["modal_within_4s"] = r.modal_within_4s ? py::cast(*r.modal_within_4s) : py::none();
  d["accepted_count"] = r.accepted_count;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Mean estimation under heteroscedastic noise";

  py::class_<Constants>(m, "Constants")
    .def(py::init<>())
    .def(py::init([](double delta, double kappa, double eta, double xi) {
           Constants c{ delta, kappa, eta, xi };
           c.validate();
           return c;
         }),
         py::arg("delta") = Constants{}.delta,
         py::arg("kappa") = Constants{}.kappa,
         py::arg("eta") = Constants{}.eta,
         py::arg("xi") = Constants{}.xi)
    .def_readwrite("delta", &Constants::delta)
    .def_readwrite("kappa", &Constants::kappa)
    .def_readwrite("eta", &Constants::eta)
    .def_readwrite("xi", &Constants::xi)
    .def_readwrite("beta", &Constants::beta)
    .def("__repr__", [](const Constants& c) {
      return "Constants(delta=" + std::to_string(c.delta) + ", kappa=" + std::to_string(c.kappa) +
             ", eta=" + std::to_string(c.eta) + ", xi=" + std::to_string(c.xi) + ")";
    });

  py::class_<Interval>(m, "Interval")
    .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
    .def_readonly("lo", &Interval::lo)
    .def_readonly("hi", &Interval::hi)
    .def_property_readonly("length", &Interval::length)
    .def_property_readonly("midpoint", &Interval::midpoint)
    .def("contains", py::overload_cast<double>(&Interval::contains, py::const_))
    .def("__eq__", [](const Interval& a, const Interval& b) { return a == b; })
    .def("__repr__", [](const Interval& iv) {
      return "Interval(" + py::repr(py::float_(iv.lo)).cast<std::string>() + ", " +
             py::repr(py::float_(iv.hi)).cast<std::string>() + ")";
    });

  py::class_<ModalResult>(m, "ModalResult")
    .def_readonly("center", &ModalResult::center)
    .def_readonly("count", &ModalResult::count)
    .def_readonly("window_lo_index", &ModalResult::window_lo_index)
    .def_readonly("window_hi_index", &ModalResult::window_hi_index);

  py::class_<AcceptDecision>(m, "AcceptDecision")
    .def_readonly("accepted", &AcceptDecision::accepted)
    .def_readonly("modal", &AcceptDecision::modal)
    .def_readonly("far_count", &AcceptDecision::far_count);

  py::class_<AdaptiveReport>(m, "AdaptiveReport")
    .def_readonly("estimate", &AdaptiveReport::estimate)
    .def_readonly("alpha", &AdaptiveReport::alpha)
    .def_readonly("median_interval", &AdaptiveReport::median_interval)
    .def_readonly("accepted_lengths", &AdaptiveReport::accepted_lengths)
    .def_readonly("final_interval", &AdaptiveReport::final_interval)
    .def_readonly("fallback_used", &AdaptiveReport::fallback_used);

  // Estimators.
  m.def("sample_mean", [](const std::vector<double>& v) { return sample_mean(to_sample(v)); }, py::arg("values"));
  m.def("sample_median", [](const std::vector<double>& v) { return sample_median(to_sample(v)); }, py::arg("values"));
  m.def("weighted_mean_oracle", [](const std::vector<double>& v, const std::vector<double>& s) {
    return weighted_mean_oracle(v, s);
  }, py::arg("values"), py::arg("sigmas"));
  m.def("median_interval_alpha", &median_interval_alpha, py::arg("delta"));
  m.def("median_interval", [](const std::vector<double>& v, double alpha) {
    return median_interval(to_sample(v), alpha);
  }, py::arg("values"), py::arg("alpha"));
  m.def("count_in", [](const std::vector<double>& v, double x, double s) {
    return count_in(to_sample(v), x, s);
  }, py::arg("values"), py::arg("x"), py::arg("s"));
  m.def("modal_interval", [](const std::vector<double>& v, double s) {
    return modal_interval(to_sample(v), s);
  }, py::arg("values"), py::arg("s"));
  m.def("max_count_excluding", [](const std::vector<double>& v, double s, double center, double radius) {
    return max_count_excluding(to_sample(v), s, center, radius);
  }, py::arg("values"), py::arg("s"), py::arg("center"), py::arg("exclusion_radius"));
  m.def("accept", [](const std::vector<double>& v, double s, const Constants& c) {
    return accept(to_sample(v), s, c);
  }, py::arg("values"), py::arg("s"), py::arg("constants") = Constants{});
  m.def("candidate_lengths", [](const std::vector<double>& v, const Interval& iv, const std::string& mode) {
    return candidate_lengths(iv, parse_grid_mode(mode), to_sample(v));
  }, py::arg("values"), py::arg("median_interval"), py::arg("mode") = "dyadic");
  m.def("adaptive_estimate", [](const std::vector<double>& v, const Constants& c, const std::string& mode) {
    return adaptive_estimate(to_sample(v), c, parse_grid_mode(mode));
  }, py::arg("values"), py::arg("constants") = Constants{}, py::arg("mode") = "dyadic");
  m.def("modal_mean", [](const std::vector<double>& v, const Interval& iv) {
    return modal_mean(to_sample(v), iv);
  }, py::arg("values"), py::arg("interval"));

  // Oracle-side theory.
  m.def("phi_mass", [](const std::string& family, double t) {
    return phi_mass(Family::parse(family), t);
  }, py::arg("family"), py::arg("t"));
  m.def("expected_count", [](std::vector<double> sigmas, const std::string& family, double s) {
    return expected_count(to_profile(std::move(sigmas)), Family::parse(family), s);
  }, py::arg("sigmas"), py::arg("family"), py::arg("s"));
  m.def("m_of_s", [](std::vector<double> sigmas, double s) {
    return m_of_s(to_profile(std::move(sigmas)), s);
  }, py::arg("sigmas"), py::arg("s"));
  m.def("is_admissible",
        [](std::vector<double> sigmas, const std::string& family, double s, double delta, double kappa,
           const std::string& criterion) {
          return is_admissible(to_profile(std::move(sigmas)), Family::parse(family), s, delta, kappa,
                               parse_criterion(criterion));
        },
        py::arg("sigmas"), py::arg("family"), py::arg("s"), py::arg("delta"), py::arg("kappa"),
        py::arg("criterion") = "exact");
  m.def("s_bar",
        [](std::vector<double> sigmas, const std::string& family, double delta, double kappa,
           const std::string& criterion) {
          return s_bar(to_profile(std::move(sigmas)), Family::parse(family), delta, kappa, parse_criterion(criterion));
        },
        py::arg("sigmas"), py::arg("family"), py::arg("delta"), py::arg("kappa"), py::arg("criterion") = "exact");
  m.def("median_interval_bound", [](std::vector<double> sigmas, double delta, double beta) {
    return median_interval_bound(to_profile(std::move(sigmas)), delta, beta);
  }, py::arg("sigmas"), py::arg("delta"), py::arg("beta"));
  m.def("gordon_moment_bound", [](std::vector<double> sigmas, std::size_t k, double p, double beta) {
    return gordon_moment_bound(to_profile(std::move(sigmas)), k, p, beta);
  }, py::arg("sigmas"), py::arg("k"), py::arg("p"), py::arg("beta"));
  m.def("adaptive_bound", [](std::vector<double> sigmas, const std::string& family, double delta, double kappa) {
    const auto b = adaptive_bound(to_profile(std::move(sigmas)), Family::parse(family), delta, kappa);
    py::dict d;
    d["s_bar"] = b.s_bar ? py::cast(*b.s_bar) : py::none();
    d["median_term"] = b.median_term;
    d["value"] = b.value;
    return d;
  }, py::arg("sigmas"), py::arg("family"), py::arg("delta"), py::arg("kappa"));
  m.def("xia_bound", [](std::vector<double> sigmas, double delta) {
    const auto b = xia_bound(to_profile(std::move(sigmas)), delta);
    return py::make_tuple(b.applicable, b.bound);
  }, py::arg("sigmas"), py::arg("delta"));
  m.def("chierichetti_style_bound", [](std::vector<double> sigmas, double c) {
    return chierichetti_style_bound(to_profile(std::move(sigmas)), c);
  }, py::arg("sigmas"), py::arg("c"));

  // Simulation.
  m.def("make_profile",
        [](const std::string& kind, std::size_t n, std::map<std::string, double> params,
           std::vector<double> sigmas) {
          ProfileSpec spec;
          spec.kind = parse_profile_kind(kind);
          spec.n = n;
          spec.params = std::move(params);
          spec.custom_sigmas = std::move(sigmas);
          if (spec.kind == ProfileKind::custom && spec.n == 0)
            spec.n = spec.custom_sigmas.size();
          const auto p = make_profile(spec);
          return std::vector<double>(p.sigmas().begin(), p.sigmas().end());
        },
        py::arg("kind"), py::arg("n") = 0, py::arg("params") = std::map<std::string, double>{},
        py::arg("sigmas") = std::vector<double>{});
  m.def("gen_sample",
        [](double mu, std::vector<double> sigmas, const std::string& family, std::uint64_t seed, std::uint64_t stream) {
          Philox rng(substream_key(seed, stream));
          return gen_sample(rng, mu, to_profile(std::move(sigmas)), Family::parse(family));
        },
        py::arg("mu"), py::arg("sigmas"), py::arg("family") = "gaussian", py::arg("seed") = 0, py::arg("stream") = 0);
  m.def("simulate", [](const std::string& run_json) {
    const auto run = app::parse_run_config(run_json);
    std::vector<GridRun> runs;
    {
      py::gil_scoped_release release;
      runs = run_grid(run.experiment);
    }
    py::list out;
    for (const auto& g : runs) {
      py::dict d;
      d["n"] = g.n;
      d["delta"] = g.delta;
      py::list records;
      for (const auto& r : g.records)
        records.append(record_dict(r));
      d["records"] = records;
      out.append(d);
    }
    return out;
  }, py::arg("run_json"), "Run a simulation described by a run-file JSON string; output paths are ignored.");
  m.def("calibrate_constants", [](const std::string& family, double delta, std::size_t trials, std::uint64_t seed) {
    const auto r = calibrate_constants(Family::parse(family), delta, trials, seed);
    py::dict d;
    d["kappa1"] = r.kappa1;
    d["kappa2"] = r.kappa2;
    d["kappa"] = r.suggested.kappa;
    d["eta"] = r.suggested.eta;
    d["xi"] = r.suggested.xi;
    d["sizes"] = r.sizes;
    return d;
  }, py::arg("family") = "gaussian", py::arg("delta") = 0.1, py::arg("trials") = 1000, py::arg("seed") = 0);
}
