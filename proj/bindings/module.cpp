#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "regionprove/engine.hpp"
#include "regionprove/geometry.hpp"
#include "regionprove/io.hpp"
#include "regionprove/network.hpp"
#include "regionprove/oracle.hpp"
#include "regionprove/tolerance.hpp"

namespace py = pybind11;
using namespace regionprove;

namespace {

EngineConfig make_config(double alpha, double rate, std::int64_t n, std::int64_t m,
                         const std::string& heuristic, int max_splits,
                         std::optional<double> min_side_eps, std::uint64_t seed, double beta,
                         int threads, std::optional<double> time_limit_s) {
  EngineConfig config;
  config.tolerance = ToleranceParams{alpha, rate, n, m};
  config.heuristic = heuristic_from_string(heuristic);
  config.max_splits = max_splits;
  config.min_side_eps = min_side_eps;
  config.master_seed = seed;
  config.min_split_fraction = beta;
  config.threads = threads;
  config.time_limit_s = time_limit_s;
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Probabilistic enumeration of safe input regions for ReLU networks";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<TimeoutError>(m, "TimeoutError", PyExc_RuntimeError);

  py::class_<Hyperrectangle>(m, "Hyperrectangle")
      .def(py::init([](std::vector<double> lower, std::vector<double> upper) {
             Hyperrectangle box{std::move(lower), std::move(upper)};
             box.validate();
             return box;
           }),
           py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &Hyperrectangle::lower)
      .def_readonly("upper", &Hyperrectangle::upper)
      .def("dim", &Hyperrectangle::dim)
      .def("__repr__", [](const Hyperrectangle& box) {
        std::string s = "Hyperrectangle([";
        for (std::size_t i = 0; i < box.dim(); ++i)
          s += (i ? ", [" : "[") + std::to_string(box.lower[i]) + ", " +
               std::to_string(box.upper[i]) + "]";
        return s + "])";
      });

  m.def("volume", &volume, py::arg("box"));
  m.def(
      "split",
      [](const Hyperrectangle& box, std::size_t dim, double at) { return split(box, dim, at); },
      py::arg("box"), py::arg("dim"), py::arg("at"));
  m.def("is_eps_bounded", &is_eps_bounded, py::arg("box"), py::arg("eps"));
  m.def("is_eps_aligned", &is_eps_aligned, py::arg("box"), py::arg("eps"));
  m.def("eps_align_shrink", &eps_align_shrink, py::arg("box"), py::arg("eps"));

  m.def("confidence_single", &confidence_single, py::arg("n"), py::arg("rate"));
  m.def("confidence_joint", &confidence_joint, py::arg("n"), py::arg("rate"), py::arg("m"));
  m.def("required_sample_size", &required_sample_size, py::arg("alpha"), py::arg("rate"),
        py::arg("m"));

  py::class_<ToleranceParams>(m, "ToleranceParams")
      .def(py::init<double, double, std::int64_t, std::int64_t>(), py::arg("alpha") = 0.999,
           py::arg("rate") = 0.995, py::arg("n") = 3500, py::arg("m") = 10000)
      .def_readonly("alpha", &ToleranceParams::alpha)
      .def_readonly("rate", &ToleranceParams::rate)
      .def_readonly("n", &ToleranceParams::n)
      .def_readonly("m", &ToleranceParams::m)
      .def("consistent", &ToleranceParams::consistent);

  py::class_<Network>(m, "Network")
      .def_static("from_json", &parse_network_json, py::arg("text"))
      .def_static("from_nnet",
                  [](const std::string& text) { return parse_nnet(text); }, py::arg("text"))
      .def_static("from_file", &parse_network_file, py::arg("path"))
      .def_property_readonly("input_dim", &Network::input_dim)
      .def_property_readonly("output_dim", &Network::output_dim)
      .def("without_normalization", &Network::without_normalization)
      .def("forward", &Network::forward, py::arg("x"))
      .def("forward_batch", &Network::forward_batch, py::arg("xs"))
      .def("to_json", &write_network_json)
      .def("to_nnet", &write_nnet);

  py::class_<LinearConstraint>(m, "LinearConstraint")
      .def(py::init([](Eigen::VectorXd coeffs, double offset) {
             return LinearConstraint{std::move(coeffs), offset};
           }),
           py::arg("coeffs"), py::arg("offset") = 0.0)
      .def_readonly("coeffs", &LinearConstraint::coeffs)
      .def_readonly("offset", &LinearConstraint::offset);

  py::class_<SafetyProperty>(m, "SafetyProperty")
      .def(py::init([](Hyperrectangle domain, std::vector<LinearConstraint> constraints) {
             return SafetyProperty{std::move(domain), std::move(constraints)};
           }),
           py::arg("domain"), py::arg("constraints"))
      .def_static("from_json", &parse_property_json, py::arg("text"))
      .def_static("from_file", &parse_property_file, py::arg("path"))
      .def_readonly("domain", &SafetyProperty::domain)
      .def_readonly("constraints", &SafetyProperty::constraints)
      .def("to_json", &write_property_json);

  py::class_<AugmentedNetwork>(m, "AugmentedNetwork")
      .def_property_readonly("input_dim", &AugmentedNetwork::input_dim)
      .def("evaluate", &AugmentedNetwork::evaluate, py::arg("x"))
      .def("evaluate_batch", &AugmentedNetwork::evaluate_batch, py::arg("xs"));

  m.def("augment", &augment, py::arg("net"), py::arg("prop"));

  py::enum_<RegionKind>(m, "RegionKind")
      .value("SAFE", RegionKind::Safe)
      .value("UNSAFE", RegionKind::Unsafe)
      .value("UNKNOWN", RegionKind::Unknown);

  py::class_<ReachableEstimate>(m, "ReachableEstimate")
      .def_readonly("lo", &ReachableEstimate::lo)
      .def_readonly("hi", &ReachableEstimate::hi)
      .def_readonly("safe_points", &ReachableEstimate::safe_points)
      .def_readonly("violation_points", &ReachableEstimate::violation_points)
      .def_readonly("safe_values", &ReachableEstimate::safe_values)
      .def_readonly("violation_values", &ReachableEstimate::violation_values);

  m.def("estimate_from_points", &estimate_from_points, py::arg("net"), py::arg("points"));
  m.def("compute_reachable_set", &compute_reachable_set, py::arg("net"), py::arg("region"),
        py::arg("n"), py::arg("seed"));
  m.def("classify_region", &classify_region, py::arg("estimate"));

  py::class_<ClassifiedRegion>(m, "ClassifiedRegion")
      .def_readonly("box", &ClassifiedRegion::box)
      .def_readonly("depth", &ClassifiedRegion::depth)
      .def_readonly("seed", &ClassifiedRegion::seed);

  py::class_<VerificationOutcome>(m, "VerificationOutcome")
      .def_readonly("safe", &VerificationOutcome::safe)
      .def_readonly("unsafe", &VerificationOutcome::unsafe)
      .def_readonly("unknown", &VerificationOutcome::unknown)
      .def_readonly("property", &VerificationOutcome::property)
      .def_readonly("params", &VerificationOutcome::params)
      .def_readonly("safe_rate", &VerificationOutcome::safe_rate)
      .def_readonly("unsafe_rate", &VerificationOutcome::unsafe_rate)
      .def_readonly("unknown_rate", &VerificationOutcome::unknown_rate)
      .def_readonly("confidence_per_region", &VerificationOutcome::confidence_per_region)
      .def_readonly("confidence_joint_achieved", &VerificationOutcome::confidence_joint_achieved)
      .def_readonly("wall_time_s", &VerificationOutcome::wall_time_s)
      .def("to_json", &write_outcome_json)
      .def("regions_csv", &write_regions_csv)
      .def("svg", &render_svg_2d, py::arg("width_px") = 800, py::arg("height_px") = 800);

  m.def(
      "run_eprove",
      [](const Network& net, const SafetyProperty& prop, double alpha, double rate, std::int64_t n,
         std::int64_t m_bound, const std::string& heuristic, int max_splits,
         std::optional<double> min_side_eps, std::uint64_t seed, double beta, int threads,
         std::optional<double> time_limit_s) {
        const EngineConfig config = make_config(alpha, rate, n, m_bound, heuristic, max_splits,
                                                min_side_eps, seed, beta, threads, time_limit_s);
        py::gil_scoped_release release;
        return run_eprove(net, prop, config);
      },
      py::arg("net"), py::arg("prop"), py::arg("alpha") = 0.999, py::arg("rate") = 0.995,
      py::arg("n") = 3500, py::arg("m") = 10000, py::arg("heuristic") = "h5",
      py::arg("max_splits") = 18, py::arg("min_side_eps") = std::nullopt, py::arg("seed") = 0,
      py::arg("beta") = 0.05, py::arg("threads") = 1, py::arg("time_limit_s") = std::nullopt);

  py::class_<OracleReport>(m, "OracleReport")
      .def_readonly("safe_rate", &OracleReport::safe_rate)
      .def_readonly("violation_rate", &OracleReport::violation_rate)
      .def_readonly("samples_or_cells", &OracleReport::samples_or_cells)
      .def_readonly("wall_time_s", &OracleReport::wall_time_s)
      .def_property_readonly("method",
                             [](const OracleReport& r) { return std::string(to_string(r.method)); })
      .def("to_json", &write_oracle_report_json);

  m.def(
      "grid_safe_rate",
      [](const AugmentedNetwork& net, const Hyperrectangle& region, std::int64_t cells_per_dim,
         int threads) {
        py::gil_scoped_release release;
        return grid_safe_rate(net, region, cells_per_dim, threads);
      },
      py::arg("net"), py::arg("region"), py::arg("cells_per_dim"), py::arg("threads") = 1);
  m.def(
      "mc_safe_rate",
      [](const AugmentedNetwork& net, const Hyperrectangle& region, std::int64_t samples,
         std::uint64_t seed, int threads) {
        py::gil_scoped_release release;
        return mc_safe_rate(net, region, samples, seed, threads);
      },
      py::arg("net"), py::arg("region"), py::arg("samples"), py::arg("seed") = 0,
      py::arg("threads") = 1);
  m.def(
      "region_violation_fraction",
      [](const AugmentedNetwork& net, const Hyperrectangle& region, std::int64_t cells_per_dim,
         int threads) {
        py::gil_scoped_release release;
        return region_violation_fraction(net, region, cells_per_dim, threads);
      },
      py::arg("net"), py::arg("region"), py::arg("cells_per_dim"), py::arg("threads") = 1);

  m.def("read_outcome_json", &read_outcome_json, py::arg("text"));
}
