#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "checks.hpp"
#include "hartree/diagnostics.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"
#include "hartree/experiments.hpp"

namespace py = pybind11;
using namespace hartree;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class T>
py::array_t<T> to_numpy(std::span<const T> v) {
  py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

RadialField field(const RadialGrid& g, const CArray& values) {
  if (values.ndim() != 1 || values.shape(0) != g.n())
    fail(ErrorKind::InvalidInput, "field needs a 1-d array of length grid.n");
  return RadialField(g, std::vector<cplx>(values.data(), values.data() + values.size()));
}

NonlinearMode mode_of(const Potential& V) {
  return V.is_delta() ? NonlinearMode::cubic_nls(V.coefficient()) : NonlinearMode::hartree(V);
}

NormKind norm_kind(const std::string& s) {
  if (s == "L2") return NormKind::L2;
  if (s == "L3") return NormKind::L3;
  if (s == "L4") return NormKind::L4;
  if (s == "H1dot") return NormKind::H1dot;
  if (s == "Hhalfdot") return NormKind::Hhalfdot;
  fail(ErrorKind::InvalidInput, "unknown norm " + s + " (L2, L3, L4, H1dot, Hhalfdot)");
}

py::dict report_dict(const ConditionReport& r) {
  py::dict d;
  d["alpha_requested"] = r.alpha_requested;
  d["alpha_measured"] = r.alpha_measured;
  d["connection_ok"] = r.connection_ok;
  d["l1_norm"] = r.l1_norm;
  d["weight_l1_norm"] = r.weight_l1_norm;
  d["integrable_ok"] = r.integrable_ok;
  d["c_measured"] = r.c_measured;
  d["c_bound"] = r.c_bound;
  d["pointwise_ok"] = r.pointwise_ok;
  d["c_v"] = r.c_v;
  d["focusing"] = r.focusing;
  return d;
}

py::dict fit_dict(const RateFit& f) {
  py::dict d;
  d["t_est"] = f.t_est;
  d["gamma_hat"] = f.gamma_hat;
  d["intercept"] = f.intercept;
  d["gamma_residual"] = f.gamma_residual;
  d["c_quarter"] = f.c_quarter;
  d["c_quarter_min"] = f.c_quarter_min;
  d["c_quarter_max"] = f.c_quarter_max;
  d["bounded_below"] = f.bounded_below;
  d["samples"] = f.samples;
  return d;
}

py::dict record_dict(const RunRecord& r) {
  py::dict d;
  d["config_hash"] = r.config_hash;
  d["status"] = status_name(r.status);
  d["directory"] = r.directory;
  d["csv"] = r.csv;
  d["complete"] = r.complete;
  d["reused"] = r.reused;
  d["steps"] = r.steps;
  d["t_final"] = r.t_final;
  d["t_est"] = r.t_est;
  d["t_star"] = r.t_star;
  d["mass_drift"] = r.mass_drift;
  d["energy_drift"] = r.energy_drift;
  d["rate"] = r.rate ? py::object(fit_dict(*r.rate)) : py::none();
  d["rate_note"] = r.rate_note;
  d["inside_regime"] = r.inside_regime;
  return d;
}

RunConfig config_from(const py::object& src) {
  const auto s = py::str(src).cast<std::string>();
  if (py::isinstance<py::str>(src) && s.find('=') != std::string::npos) return parse_config(s);
  return load_config(s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Radial Hartree / cubic NLS lab: grids, kernels, evolution, diagnostics and runs";

  static py::exception<Error> error(m, "HartreeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_tag(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<RadialGrid>(m, "RadialGrid")
      .def(py::init<int, double>(), py::arg("n"), py::arg("r_max"))
      .def_property_readonly("n", &RadialGrid::n)
      .def_property_readonly("r_max", &RadialGrid::r_max)
      .def_property_readonly("dr", &RadialGrid::dr)
      .def_property_readonly("r", [](const RadialGrid& g) { return to_numpy<double>(g.nodes()); })
      .def_property_readonly("k", [](const RadialGrid& g) { return to_numpy<double>(g.wavenumbers()); })
      .def("__repr__", [](const RadialGrid& g) {
        return "RadialGrid(n=" + std::to_string(g.n()) + ", r_max=" + std::to_string(g.r_max()) + ")";
      });

  py::class_<Potential>(m, "Potential")
      .def_static("log", &make_log_potential, py::arg("alpha_log") = 2.0, py::arg("delta") = 0.1)
      .def_static("gaussian", &Potential::gaussian, py::arg("width") = 1.0, py::arg("amplitude") = 1.0)
      .def_static("inverse_cube", &Potential::inverse_cube, py::arg("core") = 0.3, py::arg("outer") = 1.5)
      .def_static("delta", &Potential::delta, py::arg("strength") = 1.0)
      .def("scaled", [](const Potential& V, double eps) { return scale(V, eps); }, py::arg("eps"))
      .def("with_coefficient", &Potential::with_coefficient)
      .def_property_readonly("epsilon", &Potential::epsilon)
      .def_property_readonly("coefficient", &Potential::coefficient)
      .def_property_readonly("is_delta", &Potential::is_delta)
      .def("__call__", py::vectorize(&Potential::evaluate))
      .def("fourier", py::vectorize(&Potential::fourier))
      .def("l1_norm", &Potential::l1_norm);

  m.def(
      "check_kernel",
      [](const Potential& V, double alpha, int samples) { return report_dict(check_kernel(V, alpha, samples)); },
      py::arg("V"), py::arg("alpha"), py::arg("samples") = 4000,
      "Admissibility report: connection, integrability and pointwise conditions.");

  m.def(
      "norm", [](const RadialGrid& g, const CArray& u, const std::string& kind) { return norm(field(g, u), norm_kind(kind)); },
      py::arg("grid"), py::arg("u"), py::arg("kind") = "L2");

  m.def(
      "conserved",
      [](const RadialGrid& g, const CArray& u, const Potential& V) {
        const auto c = conserved(field(g, u), mode_of(V));
        py::dict d;
        d["mass"] = c.mass;
        d["energy"] = c.energy;
        d["kinetic"] = c.kinetic;
        d["interaction"] = c.interaction;
        d["momentum"] = c.momentum;
        return d;
      },
      py::arg("grid"), py::arg("u"), py::arg("V"));

  m.def(
      "convolve",
      [](const Potential& V, const RadialGrid& g, const DArray& rho, bool direct) {
        RealProfile p(g, std::vector<double>(rho.data(), rho.data() + rho.size()));
        const auto out = direct ? convolve_direct(V, p) : convolve_spectral(V, p).values;
        return to_numpy<double>(out.values);
      },
      py::arg("V"), py::arg("grid"), py::arg("rho"), py::arg("direct") = false, "(V * rho)(r) for a radial density.");

  m.def(
      "evolve",
      [](const RadialGrid& g, const CArray& u0, const Potential& V, double t_end, double dt_max, double cfl,
         int sample_stride, double blowup_threshold) {
        AdaptivePolicy p;
        p.dt_max = dt_max;
        p.cfl = cfl;
        p.sample_stride = sample_stride;
        p.blowup_threshold = blowup_threshold;
        SolverState s(field(g, u0), mode_of(V));
        std::vector<double> t, h1, l3, mass, energy;
        {
          py::gil_scoped_release release;
          evolve(s, t_end, p, [&](const SolverState& st) {
            const auto c = conserved(st.u, st.mode);
            t.push_back(st.t);
            h1.push_back(norm(st.u, NormKind::H1dot));
            l3.push_back(norm(st.u, NormKind::L3));
            mass.push_back(c.mass);
            energy.push_back(c.energy);
          });
        }
        py::dict d;
        d["u"] = to_numpy<cplx>(s.u.values());
        d["t"] = s.t;
        d["status"] = status_name(s.status);
        d["t_est"] = s.t_est;
        d["steps"] = s.step_count;
        py::dict samples;
        samples["t"] = to_numpy<double>(t);
        samples["H1"] = to_numpy<double>(h1);
        samples["L3"] = to_numpy<double>(l3);
        samples["mass"] = to_numpy<double>(mass);
        samples["energy"] = to_numpy<double>(energy);
        d["samples"] = samples;
        return d;
      },
      py::arg("grid"), py::arg("u0"), py::arg("V"), py::arg("t_end"), py::arg("dt_max") = 1e-2,
      py::arg("cfl") = 0.1, py::arg("sample_stride") = 10, py::arg("blowup_threshold") = 4.0,
      "Strang split-step evolution with the adaptive step; returns the final state and sampled diagnostics.");

  m.def(
      "renormalize",
      [](const RadialGrid& g, const CArray& u) {
        const auto view = renormalize(field(g, u));
        return py::make_tuple(view.v.grid(), to_numpy<cplx>(view.v.values()), view.lambda);
      },
      py::arg("grid"), py::arg("u"), "Returns (grid, v, lambda) with ||v||_H1dot = 1.");

  m.def(
      "negative_energy_data",
      [](const Potential& V, const RadialGrid& g, double width) {
        return to_numpy<cplx>(make_negative_energy_data(V, g, width).values());
      },
      py::arg("V"), py::arg("grid"), py::arg("width") = 1.0);

  m.def(
      "concavity_bound",
      [](const RadialGrid& g, const CArray& u0, const Potential& V) { return concavity_bound(field(g, u0), mode_of(V)).t_star; },
      py::arg("grid"), py::arg("u0"), py::arg("V"), "Upper bound on the blow-up time from the second-moment identity.");

  m.def(
      "rate_fit",
      [](const DArray& t, const DArray& h1, const DArray& l3, double t_est) {
        if (t.size() != h1.size() || t.size() != l3.size()) fail(ErrorKind::InvalidInput, "t, H1 and L3 lengths differ");
        std::vector<RateSample> s;
        for (py::ssize_t i = 0; i < t.size(); ++i) s.push_back({t.data()[i], h1.data()[i], l3.data()[i]});
        return fit_dict(rate_fit(s, t_est));
      },
      py::arg("t"), py::arg("H1"), py::arg("L3"), py::arg("t_est"));

  m.def(
      "stability",
      [](const RadialGrid& g, const CArray& u0, const Potential& base, const std::vector<double>& eps, double T,
         double dt) {
        StabilityResult res;
        const auto u = field(g, u0);
        {
          py::gil_scoped_release release;
          res = stability_experiment(u, base, eps, T, dt);
        }
        std::vector<double> errors;
        for (const auto& r : res.rows) errors.push_back(r.error);
        return py::make_tuple(to_numpy<double>(errors), res.monotone);
      },
      py::arg("grid"), py::arg("u0"), py::arg("base"), py::arg("eps"), py::arg("T"), py::arg("dt"),
      "Hartree to cubic NLS errors per eps; returns (errors, non_increasing).");

  m.def(
      "run",
      [](const py::object& config, const std::filesystem::path& output_root, bool force) {
        const auto c = config_from(config);
        py::gil_scoped_release release;
        auto rec = run_scenario(c, output_root, force);
        py::gil_scoped_acquire acquire;
        return record_dict(rec);
      },
      py::arg("config"), py::arg("output_root"), py::arg("force") = false,
      "Runs a config (file path or `key = value` text) into output_root; returns the record.");

  m.def(
      "config_hash", [](const py::object& config) { return config_hash(config_from(config)); }, py::arg("config"));

  m.def(
      "read_diagnostics",
      [](const std::filesystem::path& csv) {
        const auto rows = read_diagnostics(csv);
        std::map<std::string, std::vector<double>> cols;
        std::vector<std::string> status;
        for (const auto& r : rows) {
          cols["t"].push_back(r.t);
          cols["dt"].push_back(r.dt);
          cols["mass"].push_back(r.mass);
          cols["energy"].push_back(r.energy);
          cols["H1"].push_back(r.h1);
          cols["L3"].push_back(r.l3);
          cols["lambda"].push_back(r.lambda);
          cols["rho_at_sqrt_t"].push_back(r.rho);
          cols["Va"].push_back(r.Va);
          cols["Pa"].push_back(r.Pa);
          cols["KV"].push_back(r.KV);
          cols["local_mass"].push_back(r.local_mass);
          status.push_back(r.status);
        }
        py::dict d;
        for (auto& [k, v] : cols) d[py::str(k)] = to_numpy<double>(v);
        d["status"] = status;
        return d;
      },
      py::arg("csv"));

  m.def(
      "verify",
      [](const std::string& suite) {
        std::vector<checks::CheckResult> res;
        {
          py::gil_scoped_release release;
          res = checks::run_suite(suite);
        }
        py::list out;
        for (const auto& r : res) {
          py::dict d;
          d["criterion"] = r.criterion;
          d["name"] = r.name;
          d["pass"] = r.pass;
          d["detail"] = r.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("suite"));
}
