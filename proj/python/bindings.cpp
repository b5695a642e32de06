#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "resilest/coding_analysis.hpp"
#include "resilest/error_correction.hpp"
#include "resilest/errors.hpp"
#include "resilest/io.hpp"
#include "resilest/observer_bank.hpp"
#include "resilest/plant_sim.hpp"
#include "resilest/resilient_estimator.hpp"

namespace py = pybind11;
using namespace resilest;

namespace {

SystemModel make_model(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C, double d_max, double n_max) {
  SystemModel m{std::move(A), std::move(B), std::move(C), d_max, n_max};
  m.validate();
  return m;
}

CodingMatrix coding(const Eigen::MatrixXd& phi, int n) { return CodingMatrix(phi, n > 0 ? n : static_cast<int>(phi.cols())); }

py::dict decode_dict(const DecodeResult& r) {
  py::dict d;
  d["estimate"] = r.estimate;
  d["support"] = r.support_estimate.indices();
  d["objective"] = r.objective;
  d["certified"] = r.certified;
  d["threshold"] = r.threshold;
  d["error_bound"] = r.error_bound;
  d["selection"] = r.selection.indices();
  return d;
}

}  // namespace

PYBIND11_MODULE(_resilest, m) {
  m.doc() = "Attack-resilient state estimation core";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());

  py::class_<SystemModel>(m, "SystemModel")
      .def(py::init(&make_model), py::arg("A"), py::arg("B"), py::arg("C"), py::arg("d_max") = 0.0,
           py::arg("n_max") = 0.0)
      .def_readonly("A", &SystemModel::A)
      .def_readonly("B", &SystemModel::B)
      .def_readonly("C", &SystemModel::C)
      .def_readonly("d_max", &SystemModel::d_max)
      .def_readonly("n_max", &SystemModel::n_max)
      .def_property_readonly("n", &SystemModel::n)
      .def_property_readonly("m", &SystemModel::m)
      .def_property_readonly("p", &SystemModel::p);

  py::class_<RobustnessConstants>(m, "RobustnessConstants")
      .def_readonly("q", &RobustnessConstants::q)
      .def_readonly("r", &RobustnessConstants::r)
      .def_readonly("rho", &RobustnessConstants::rho)
      .def_readonly("eta", &RobustnessConstants::eta)
      .def_readonly("kappa_d", &RobustnessConstants::kappa_d)
      .def_readonly("kappa_e", &RobustnessConstants::kappa_e)
      .def_readonly("eta_prime", &RobustnessConstants::eta_prime)
      .def_readonly("theta", &RobustnessConstants::theta)
      .def_readonly("kappa_c", &RobustnessConstants::kappa_c)
      .def_readonly("kappa_c_prime", &RobustnessConstants::kappa_c_prime);

  m.def("three_inertia", [](double Ts, double d_max, double n_max) {
    return zoh_discretize(three_inertia_model(), Ts, d_max, n_max);
  }, py::arg("T_s") = 1e-3, py::arg("d_max") = 0.0, py::arg("n_max") = 0.0);
  m.def("load_model", [](const std::string& path) { return load_model_file(path).model; });

  m.def("security_index", [](const SystemModel& s) { return security_index(s); });
  m.def("is_redundant_observable", [](const SystemModel& s, int q) { return is_q_redundant_observable(s, q); });
  m.def("observability_matrix", [](const SystemModel& s) { return observability_matrix(s).entries(); });
  m.def("stacked_cospark", [](const Eigen::MatrixXd& phi, int n) { return stacked_cospark(coding(phi, n)); },
        py::arg("phi"), py::arg("n") = 0);
  m.def("is_error_detectable", [](const Eigen::MatrixXd& phi, int q, int n) {
    return is_q_error_detectable(coding(phi, n), q);
  }, py::arg("phi"), py::arg("q"), py::arg("n") = 0);
  m.def("is_error_correctable", [](const Eigen::MatrixXd& phi, int q, int n) {
    return is_q_error_correctable(coding(phi, n), q);
  }, py::arg("phi"), py::arg("q"), py::arg("n") = 0);
  m.def("robustness_constants", [](const Eigen::MatrixXd& phi, int q, int r, int n) {
    return robustness_constants(coding(phi, n), q, r);
  }, py::arg("phi"), py::arg("q"), py::arg("r"), py::arg("n") = 0);

  m.def("decode", [](const Eigen::MatrixXd& phi, const Eigen::VectorXd& z, int q, std::optional<int> r,
                     std::optional<double> v_max, int n) {
    const CodingMatrix c = coding(phi, n);
    const StackedVector sz(z, c.block_len());
    return decode_dict(v_max ? decode_noisy(c, sz, q, r, *v_max) : decode_noiseless(c, sz, q, r));
  }, py::arg("phi"), py::arg("z"), py::arg("q"), py::arg("r") = py::none(), py::arg("v_max") = py::none(),
        py::arg("n") = 0);

  m.def("zoh_discretize", [](const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc, const Eigen::MatrixXd& Cc,
                             double Ts) {
    const SystemModel s = zoh_discretize(ContinuousModel{Ac, Bc, Cc}, Ts);
    return py::make_tuple(s.A, s.B);
  });

  m.def("observability_indices", [](const SystemModel& s) {
    std::vector<int> nu;
    for (int i = 1; i <= s.p(); ++i) nu.push_back(kalman_decompose(s, i).nu);
    return nu;
  });

  m.def("simulate_scenario", [](const std::string& scenario_json) {
    const Trace t = simulate(parse_scenario_json(scenario_json));
    py::dict d;
    d["steps"] = t.rows.size();
    d["max_error"] = t.max_error;
    d["max_bound"] = t.max_bound;
    d["minimizer_steps"] = t.minimizer_steps;
    d["bound_violations"] = t.bound_violations;
    d["kappa_c"] = t.constants.kappa_c;
    return d;
  }, py::arg("scenario_json"));
  m.def("demo_scenario_json", [] { return scenario_to_json(three_inertia_demo_scenario()); });
}
