#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tudiff/checkpoint.hpp"
#include "tudiff/dataset.hpp"
#include "tudiff/diffusion.hpp"
#include "tudiff/eval.hpp"
#include "tudiff/geometry.hpp"
#include "tudiff/model.hpp"
#include "tudiff/schedule.hpp"

namespace py = pybind11;
using namespace tudiff;

PYBIND11_MODULE(_tudiff, m) {
  m.doc() = "time-unconditional diffusion toolkit (C++ core)";

  py::enum_<ScheduleKind>(m, "ScheduleKind")
      .value("ConventionalVP", ScheduleKind::ConventionalVP)
      .value("UniformRadialVP", ScheduleKind::UniformRadialVP)
      .value("LateExpansionVP", ScheduleKind::LateExpansionVP)
      .value("OTGeodesic", ScheduleKind::OTGeodesic);

  py::class_<ScheduleSpec>(m, "ScheduleSpec")
      .def_readonly("kind", &ScheduleSpec::kind)
      .def_readonly("T", &ScheduleSpec::T)
      .def_readonly("grid", &ScheduleSpec::grid)
      .def_readonly("c", &ScheduleSpec::c)
      .def_readonly("sigma", &ScheduleSpec::sigma)
      .def_readonly("beta", &ScheduleSpec::beta)
      .def_readonly("alpha_bar", &ScheduleSpec::alpha_bar)
      .def("coefficients", &ScheduleSpec::coefficients)
      .def("__repr__", [](const ScheduleSpec& s) {
        return "<ScheduleSpec " + schedule_kind_name(s.kind) + " T=" + std::to_string(s.T) + ">";
      });

  m.def(
      "make_schedule",
      [](const std::string& kind, int T, double beta_min, double beta_max) {
        return make_schedule(parse_schedule_kind(kind), T, {beta_min, beta_max});
      },
      py::arg("kind"), py::arg("T"), py::arg("beta_min") = 1e-4, py::arg("beta_max") = 0.02);
  m.def("validate_schedule", [](const ScheduleSpec& s, double tol) {
    std::vector<std::tuple<int, std::string, double>> out;
    for (const auto& v : validate(s, tol)) out.emplace_back(v.k, v.invariant, v.magnitude);
    return out;
  });

  py::class_<AmbientConfig>(m, "AmbientConfig")
      .def(py::init([](int D, int d_prime) {
             AmbientConfig a{D, d_prime};
             validate_ambient(a);
             return a;
           }),
           py::arg("D"), py::arg("d_prime"))
      .def_readonly("D", &AmbientConfig::D)
      .def_readonly("d_prime", &AmbientConfig::d_prime);

  py::class_<ShellBand>(m, "ShellBand")
      .def_readonly("k", &ShellBand::k)
      .def_readonly("r", &ShellBand::r)
      .def_readonly("r_minus", &ShellBand::r_minus)
      .def_readonly("r_plus", &ShellBand::r_plus)
      .def_readonly("epsilon", &ShellBand::epsilon)
      .def_readonly("width", &ShellBand::width);

  py::class_<PairAudit>(m, "PairAudit")
      .def_readonly("k", &PairAudit::k)
      .def_readonly("sigma_k", &PairAudit::sigma_k)
      .def_readonly("delta_sigma", &PairAudit::delta_sigma)
      .def_readonly("required_gap", &PairAudit::required_gap)
      .def_readonly("r_minus_next", &PairAudit::r_minus_next)
      .def_readonly("r_plus_curr", &PairAudit::r_plus_curr)
      .def_readonly("passes", &PairAudit::pass);

  py::class_<DisjointnessReport>(m, "DisjointnessReport")
      .def_readonly("epsilon", &DisjointnessReport::epsilon)
      .def_readonly("pairs", &DisjointnessReport::pairs)
      .def_readonly("first_fail", &DisjointnessReport::first_fail)
      .def_readonly("last_fail", &DisjointnessReport::last_fail)
      .def("all_pass", &DisjointnessReport::all_pass);

  m.def("shell_radius", &shell_radius);
  m.def("shell_band", &shell_band);
  m.def("rho_epsilon", &rho_epsilon);
  m.def("kappa_epsilon", &kappa_epsilon);
  m.def("prop3_min_dt", &prop3_min_dt);
  m.def("audit_disjointness", &audit_disjointness);
  m.def("mc_shell_coverage", &mc_shell_coverage, py::arg("schedule"), py::arg("k"),
        py::arg("ambient"), py::arg("epsilon"), py::arg("n"), py::arg("seed"));

  py::class_<SampleBatch>(m, "SampleBatch")
      .def(py::init([](Eigen::MatrixXd data, std::vector<int> labels, int d_prime) {
             SampleBatch b;
             b.data = std::move(data);
             b.labels = std::move(labels);
             b.d_prime = d_prime > 0 ? d_prime : static_cast<int>(b.data.cols());
             return b;
           }),
           py::arg("data"), py::arg("labels") = std::vector<int>{}, py::arg("d_prime") = 0)
      .def_readwrite("data", &SampleBatch::data)
      .def_readwrite("labels", &SampleBatch::labels)
      .def_readwrite("d_prime", &SampleBatch::d_prime)
      .def_property_readonly("n", &SampleBatch::n)
      .def_property_readonly("dim", &SampleBatch::dim);

  m.def(
      "swiss_roll",
      [](long n, double noise_scale, std::uint64_t seed) {
        return swiss_roll(n, noise_scale, seed);
      },
      py::arg("n"), py::arg("noise_scale") = 0.01, py::arg("seed") = 0);
  m.def(
      "gaussian_mixture",
      [](long n, const std::vector<std::pair<double, double>>& centers, double scale,
         std::uint64_t seed) {
        std::vector<Eigen::Vector2d> cs;
        for (const auto& [x, y] : centers) cs.emplace_back(x, y);
        return gaussian_mixture(n, cs, scale, seed);
      },
      py::arg("n"), py::arg("centers"), py::arg("scale") = 0.08, py::arg("seed") = 0);
  m.def("embed", &embed);
  m.def("distance_to_M0",
        [](const Eigen::VectorXd& x, int d_prime) {
          return distance_to_M0(x.transpose(), d_prime);
        });

  py::class_<OrthoTimeConfig>(m, "OrthoTimeConfig")
      .def_readwrite("direction", &OrthoTimeConfig::direction)
      .def_readwrite("delta", &OrthoTimeConfig::delta)
      .def_readwrite("class_directions", &OrthoTimeConfig::class_directions);

  m.def("scaled_delta", &scaled_delta);
  m.def("axis_ortho_config", &axis_ortho_config, py::arg("ambient"), py::arg("delta"),
        py::arg("n_classes") = 0);
  m.def("data_ortho_config", &data_ortho_config);
  m.def("project_ortho",
        [](const Eigen::VectorXd& z, const OrthoTimeConfig& o) {
          return project_ortho(z, o.direction);
        });
  m.def("forward_plain", &forward_plain);
  m.def("forward_ortho", &forward_ortho);
  m.def("ddim_step_plain", &ddim_step_plain);
  m.def("ddim_step_ortho", &ddim_step_ortho);

  py::class_<DenoiserModel>(m, "DenoiserModel")
      .def_readonly("layer_sizes", &DenoiserModel::layer_sizes)
      .def_property_readonly("parameter_count", &DenoiserModel::parameter_count);

  m.def("init_model", &init_model);
  m.def("predict", &predict);
  m.def("loss_and_grad", [](const DenoiserModel& model, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& target) {
    auto [loss, grad] = loss_and_grad(model, x, target);
    return py::make_tuple(loss, grad.weights, grad.biases);
  });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("schedule", &TrainConfig::schedule)
      .def_readwrite("ortho", &TrainConfig::ortho)
      .def_readwrite("ambient", &TrainConfig::ambient)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("conditional", &TrainConfig::conditional);

  m.def("train", [](const TrainConfig& cfg, const SampleBatch& data) {
    TrainResult r = train(cfg, data);
    return py::make_tuple(std::move(r.model), std::move(r.epoch_loss));
  });

  m.def(
      "sample",
      [](const DenoiserModel& model, const ScheduleSpec& s,
         const std::optional<OrthoTimeConfig>& ortho, const AmbientConfig& a, long n,
         std::uint64_t seed, std::optional<int> class_id, bool project_eps) {
        SampleOptions opts;
        opts.n = n;
        opts.seed = seed;
        opts.class_id = class_id;
        opts.project_eps = project_eps;
        const Predictor p = [&model](const Eigen::MatrixXd& x) { return predict(model, x); };
        return sample(p, s, ortho.has_value() ? &*ortho : nullptr, a, opts);
      },
      py::arg("model"), py::arg("schedule"), py::arg("ortho"), py::arg("ambient"),
      py::arg("n"), py::arg("seed") = 0, py::arg("class_id") = std::nullopt,
      py::arg("project_eps") = true);

  py::class_<Checkpoint>(m, "Checkpoint")
      .def(py::init<>())
      .def_readwrite("ambient", &Checkpoint::ambient)
      .def_readwrite("schedule", &Checkpoint::schedule)
      .def_readwrite("ortho", &Checkpoint::ortho)
      .def_readwrite("model", &Checkpoint::model);

  m.def("save_checkpoint", &save_checkpoint);
  m.def("load_checkpoint", &load_checkpoint);

  py::register_exception<CheckpointError>(m, "CheckpointError");

  py::class_<EvalSettings>(m, "EvalSettings")
      .def(py::init([](int d_prime, int n_projections, std::uint64_t seed) {
             return EvalSettings{d_prime, n_projections, seed};
           }),
           py::arg("d_prime") = 2, py::arg("n_projections") = 128, py::arg("seed") = 0)
      .def_readwrite("d_prime", &EvalSettings::d_prime)
      .def_readwrite("n_projections", &EvalSettings::n_projections)
      .def_readwrite("seed", &EvalSettings::seed);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("mean_manifold_distance", &EvalReport::mean_manifold_distance)
      .def_readonly("median_manifold_distance", &EvalReport::median_manifold_distance)
      .def_readonly("sliced_distance", &EvalReport::sliced_distance)
      .def_readonly("n_generated", &EvalReport::n_generated)
      .def_readonly("n_reference", &EvalReport::n_reference);

  m.def("mean_manifold_distance", &mean_manifold_distance);
  m.def("median_manifold_distance", &median_manifold_distance);
  m.def("sliced_distance", &sliced_distance, py::arg("a"), py::arg("b"), py::arg("d_prime"),
        py::arg("n_projections") = 128, py::arg("seed") = 0);
  m.def("evaluate", &evaluate);
}
