#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmotion/errors.hpp"
#include "qmotion/quantile.hpp"
#include "qmotion/tunneling.hpp"

namespace py = pybind11;
using namespace qmotion;

namespace {

// Python holds models as mutable shared_ptr; the library hands out const ones.
using ModelHolder = std::shared_ptr<PacketModel>;
using SpectralHolder = std::shared_ptr<SpectralPacketModel>;

ModelHolder hold(PacketModelPtr p) { return std::const_pointer_cast<PacketModel>(p); }
SpectralHolder hold(std::shared_ptr<const SpectralPacketModel> p) {
  return std::const_pointer_cast<SpectralPacketModel>(p);
}

py::dict trajectory_dict(const QuantileTrajectory& tr) {
  const std::size_t n = tr.samples.size();
  py::array_t<double> t(n), x(n), v(n);
  py::array_t<bool> fb(n);
  auto tt = t.mutable_unchecked<1>();
  auto xx = x.mutable_unchecked<1>();
  auto vv = v.mutable_unchecked<1>();
  auto ff = fb.mutable_unchecked<1>();
  for (std::size_t i = 0; i < n; ++i) {
    tt(i) = tr.samples[i].t;
    xx(i) = tr.samples[i].x;
    vv(i) = tr.samples[i].v;
    ff(i) = tr.samples[i].cdf_fallback;
  }
  py::dict d;
  d["P"] = tr.P;
  d["t"] = t;
  d["x"] = x;
  d["v"] = v;
  d["cdf_fallback"] = fb;
  d["termination"] = to_string(tr.termination);
  d["end_t"] = tr.end_t;
  d["end_x"] = tr.end_x;
  return d;
}

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantile trajectories of 1D/3D wave packets (hbar = m = 1)";

  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<NonConvergence>(m, "NonConvergence", numerical);
  py::register_exception<NoSignChange>(m, "NoSignChange", numerical);
  py::register_exception<InvalidRange>(m, "InvalidRange", numerical);
  py::register_exception<StepUnderflow>(m, "StepUnderflow", numerical);
  py::register_exception<DegenerateK>(m, "DegenerateK", numerical);
  py::register_exception<GridTooCoarse>(m, "GridTooCoarse", numerical);
  py::register_exception<NormBelowP>(m, "NormBelowP", numerical);
  py::register_exception<VelocitySingular>(m, "VelocitySingular", numerical);

  py::class_<Tolerances>(m, "Tolerances")
      .def(py::init<>())
      .def_readwrite("quad_rel", &Tolerances::quad_rel)
      .def_readwrite("quad_abs", &Tolerances::quad_abs)
      .def_readwrite("root_abs", &Tolerances::root_abs)
      .def_readwrite("ode_rel", &Tolerances::ode_rel)
      .def_readwrite("ode_abs", &Tolerances::ode_abs);

  py::class_<GaussianPacketParams>(m, "GaussianPacket")
      .def(py::init([](double x_bar, double v_bar, double sigma_x0) {
             GaussianPacketParams p{x_bar, v_bar, sigma_x0, 1.0};
             p.validate();
             return p;
           }),
           py::arg("x_bar") = -10.0, py::arg("v_bar") = 2.0, py::arg("sigma_x0") = 2.5)
      .def_readonly("x_bar", &GaussianPacketParams::x_bar)
      .def_readonly("v_bar", &GaussianPacketParams::v_bar)
      .def_readonly("sigma_x0", &GaussianPacketParams::sigma_x0)
      .def("sigma_x", &GaussianPacketParams::sigma_x)
      .def_property_readonly("sigma_p", &GaussianPacketParams::sigma_p);

  py::class_<BarrierSpec>(m, "Barrier")
      .def(py::init([](double height, double half_width) {
             BarrierSpec b{height, half_width};
             b.validate();
             return b;
           }),
           py::arg("height") = 10.0, py::arg("half_width") = 0.3)
      .def_readonly("height", &BarrierSpec::height)
      .def_readonly("half_width", &BarrierSpec::half_width);

  py::class_<KGrid>(m, "KGrid")
      .def_readonly("nodes", &KGrid::nodes)
      .def_readonly("weights", &KGrid::weights)
      .def_readonly("k_min", &KGrid::k_min)
      .def_readonly("k_max", &KGrid::k_max)
      .def("__len__", &KGrid::size);
  m.def("build_kgrid", &build_kgrid, py::arg("k_bar"), py::arg("sigma_k"), py::arg("n_sigma") = presets::kSpectralSigmas,
        py::arg("n_nodes") = presets::kDefaultKNodes);
  m.def("uniform_grid", &uniform_grid, py::arg("t0"), py::arg("t1"), py::arg("step"));
  m.def("required_k_nodes", &required_k_nodes, py::arg("k_max"), py::arg("t"));

  py::class_<PacketModel, ModelHolder>(m, "PacketModel")
      .def("rho", py::vectorize(&PacketModel::rho), py::arg("x"), py::arg("t"))
      .def("current", py::vectorize(&PacketModel::current), py::arg("x"), py::arg("t"))
      .def("loss", py::vectorize(&PacketModel::loss), py::arg("x"), py::arg("t"))
      .def("tail", py::vectorize(&PacketModel::tail), py::arg("x"), py::arg("t"))
      .def("total_norm", &PacketModel::total_norm, py::arg("t"))
      .def("support", [](const PacketModel& p, double t) {
        const Interval i = p.support_hint(t);
        return py::make_tuple(i.lo, i.hi);
      });

  py::class_<SpectralFunction>(m, "SpectralFunction")
      .def_static("from_packet", &SpectralFunction::from_packet, py::arg("packet"), py::arg("grid"))
      .def("__call__", py::vectorize(&SpectralFunction::operator()), py::arg("k"))
      .def_property_readonly("k_bar", &SpectralFunction::k_bar)
      .def_property_readonly("sigma_k", &SpectralFunction::sigma_k);

  py::class_<SpectralPacketModel, PacketModel, SpectralHolder>(m, "SpectralPacketModel")
      .def("wavefunction",
           [](const SpectralPacketModel& s, double x, double t) {
             Complex psi, dpsi;
             s.wavefunction(x, t, psi, dpsi);
             return py::make_tuple(psi, dpsi);
           })
      .def_property_readonly("spectral", &SpectralPacketModel::spectral)
      .def_property_readonly("grid", &SpectralPacketModel::grid)
      .def_property_readonly("barrier", &SpectralPacketModel::barrier);

  m.def(
      "free_gaussian_model",
      [](const GaussianPacketParams& p, const Tolerances& tol) { return hold(free_gaussian_model(p, tol)); },
      py::arg("packet"), py::arg("tol") = Tolerances{});
  m.def(
      "dissipative_gaussian_model",
      [](const GaussianPacketParams& p, double lambda, const Tolerances& tol) {
        return hold(dissipative_gaussian_model(p, lambda, tol));
      },
      py::arg("packet"), py::arg("lam"), py::arg("tol") = Tolerances{});
  m.def(
      "tunneling_packet_model",
      [](const SpectralFunction& s, const BarrierSpec& b, const KGrid& g, const Tolerances& tol) {
        return hold(tunneling_packet_model(s, b, g, tol));
      },
      py::arg("spectral"), py::arg("barrier"), py::arg("grid"), py::arg("tol") = Tolerances{});
  m.def(
      "free_spectral_model",
      [](const SpectralFunction& s, const KGrid& g, const Tolerances& tol) {
        return hold(free_spectral_model(s, g, tol));
      },
      py::arg("spectral"), py::arg("grid"), py::arg("tol") = Tolerances{});

  m.def(
      "scattering",
      [](double k, const BarrierSpec& b) {
        const ScatteringMode s = scattering_mode(k, b);
        return py::make_tuple(s.T, s.R);
      },
      py::arg("k"), py::arg("barrier"), "(T, R) amplitudes for a plane wave of wavenumber k");

  m.def("tail_probability", &tail_probability, py::arg("model"), py::arg("x"), py::arg("t"));
  m.def(
      "quantile_position",
      [](const PacketModel& model, double P, double t) { return quantile_position(model, P, t); },
      py::arg("model"), py::arg("P"), py::arg("t"));
  m.def("quantile_velocity", &quantile_velocity, py::arg("model"), py::arg("x"), py::arg("t"));
  m.def(
      "trace_cdf",
      [](const PacketModel& model, double P, const py::array_t<double, py::array::c_style | py::array::forcecast>& ts) {
        const auto grid = as_vector(ts);
        QuantileTrajectory tr;
        {
          py::gil_scoped_release release;
          tr = trace_trajectory_cdf(model, P, grid);
        }
        return trajectory_dict(tr);
      },
      py::arg("model"), py::arg("P"), py::arg("t"));
  m.def(
      "trace_ode",
      [](const PacketModel& model, double P, const py::array_t<double, py::array::c_style | py::array::forcecast>& ts) {
        const auto grid = as_vector(ts);
        QuantileTrajectory tr;
        {
          py::gil_scoped_release release;
          tr = trace_trajectory_ode(model, P, grid);
        }
        return trajectory_dict(tr);
      },
      py::arg("model"), py::arg("P"), py::arg("t"));

  py::class_<DeltaPTerms>(m, "DeltaPTerms")
      .def_readonly("term1", &DeltaPTerms::term1)
      .def_readonly("term2", &DeltaPTerms::term2)
      .def_readonly("term3", &DeltaPTerms::term3)
      .def_readonly("contribution1", &DeltaPTerms::contribution1)
      .def_readonly("contribution2", &DeltaPTerms::contribution2)
      .def_readonly("contribution3", &DeltaPTerms::contribution3)
      .def_readonly("total", &DeltaPTerms::total)
      .def_readonly("n_lambda", &DeltaPTerms::n_lambda);
  m.def("delta_p_direct", &delta_p_direct, py::arg("free"), py::arg("tunneling"), py::arg("x"), py::arg("t"));
  m.def("delta_p_decomposed", &delta_p_decomposed, py::arg("spectral"), py::arg("barrier"), py::arg("grid"),
        py::arg("x"), py::arg("t"), py::arg("n_lambda") = 32, py::arg("tol") = Tolerances{});
  m.def("packet_transmission_probability", &packet_transmission_probability, py::arg("spectral"),
        py::arg("barrier"), py::arg("grid"));

  py::class_<Gaussian3DField>(m, "Gaussian3DField")
      .def(py::init([](Vec3 center, Vec3 drift, double sigma_x0) {
             Gaussian3DParams p{center, drift, sigma_x0, 1.0};
             return gaussian3d_model(p);
           }),
           py::arg("center") = Vec3{0, 0, 0}, py::arg("drift") = Vec3{1, 0, 0}, py::arg("sigma_x0") = 1.0)
      .def("rho", &Gaussian3DField::rho)
      .def("velocity", &Gaussian3DField::velocity)
      .def("mean", &Gaussian3DField::mean);
  m.def("sphere_seeds", &sphere_seeds, py::arg("center"), py::arg("radius"));
  m.def(
      "trace_flowmap_3d",
      [](const Gaussian3DField& field, const std::vector<Vec3>& seeds, const std::vector<double>& ts) {
        const FlowMap3D fm = trace_flowmap_3d(field, seeds, ts);
        // (n_seeds, n_times, 3)
        py::array_t<double> out({fm.paths.size(), ts.size(), std::size_t{3}});
        auto o = out.mutable_unchecked<3>();
        for (std::size_t i = 0; i < fm.paths.size(); ++i) {
          for (std::size_t j = 0; j < fm.paths[i].size(); ++j) {
            for (int d = 0; d < 3; ++d) o(i, j, d) = fm.paths[i][j].x[d];
          }
        }
        return py::make_tuple(out, fm.P);
      },
      py::arg("field"), py::arg("seeds"), py::arg("t"), "returns (paths, enclosed probability)");
  m.def(
      "probability_in_volume",
      [](const Gaussian3DField& field, const std::vector<Vec3>& surface, double t) {
        return probability_in_volume(field, surface, t);
      },
      py::arg("field"), py::arg("surface"), py::arg("t"));
}
