#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glenn/config.hpp"
#include "glenn/pipeline.hpp"
#include "glenn/training.hpp"

namespace py = pybind11;
using namespace glenn;

namespace {

Eigen::MatrixXd points_matrix(const std::vector<Vec2>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

Eigen::VectorXd density(const OrderField& u) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(u.num_nodes()));
  for (std::size_t i = 0; i < u.num_nodes(); ++i) d[static_cast<Eigen::Index>(i)] = std::norm(u.at(i));
  return d;
}

Mesh2D make_mesh(Domain domain, int n) {
  return domain == Domain::LShape ? generate_l_shape(n) : generate_unit_square(n);
}

}  // namespace

PYBIND11_MODULE(_glenn, m) {
  m.doc() = "Ginzburg-Landau finite element solver with neural-network initial values";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  py::enum_<Model>(m, "Model").value("Full", Model::Full).value("Reduced", Model::Reduced);
  py::enum_<Domain>(m, "Domain").value("UnitSquare", Domain::UnitSquare).value("LShape", Domain::LShape);
  py::enum_<BlockKind>(m, "BlockKind").value("SwiGLU", BlockKind::SwiGLU).value("DAGLU", BlockKind::DAGLU);
  py::enum_<Activation>(m, "Activation").value("SiLU", Activation::SiLU).value("GELU", Activation::GELU);

  py::class_<Mesh2D, std::shared_ptr<Mesh2D>>(m, "Mesh")
      .def(py::init([](int n, Domain domain) { return std::make_shared<Mesh2D>(make_mesh(domain, n)); }),
           py::arg("n"), py::arg("domain") = Domain::UnitSquare)
      .def_property_readonly("num_vertices", &Mesh2D::num_vertices)
      .def_property_readonly("num_edges", &Mesh2D::num_edges)
      .def_property_readonly("num_triangles", &Mesh2D::num_triangles)
      .def_property_readonly("area", &Mesh2D::total_area)
      .def_property_readonly("vertices", [](const Mesh2D& mesh) { return points_matrix(mesh.vertices()); });

  py::class_<Discretization, std::shared_ptr<Discretization>>(m, "Discretization")
      .def(py::init([](const std::shared_ptr<Mesh2D>& mesh) { return std::make_shared<Discretization>(mesh); }))
      .def_property_readonly("num_order_nodes", &Discretization::num_order_nodes)
      .def_property_readonly("num_potential_dofs", &Discretization::num_potential_dofs)
      .def("node_coordinates", [](const Discretization& d) { return points_matrix(d.order_node_coordinates()); })
      .def("divergence_residual",
           [](const Discretization& d, const Eigen::VectorXd& A) { return d.divergence_residual(PotentialField(A)); });

  py::class_<ProblemSpec>(m, "ProblemSpec")
      .def_static("standard", &ProblemSpec::standard, py::arg("model"), py::arg("domain") = Domain::UnitSquare)
      .def_property_readonly("model", [](const ProblemSpec& s) { return s.model; });

  py::class_<GLState>(m, "State")
      .def_property_readonly("u", [](const GLState& s) { return s.u().coeffs; })
      .def_property_readonly("A", [](const GLState& s) { return s.A().coeffs; })
      .def_property_readonly("kappa", &GLState::kappa)
      .def("density", [](const GLState& s) { return density(s.u()); });

  m.def(
      "initial_state",
      [](const Discretization& disc, const ProblemSpec& spec, int j, double kappa) {
        return make_state(disc, spec, initial_value(j, spec.domain), kappa);
      },
      py::arg("disc"), py::arg("spec"), py::arg("j"), py::arg("kappa"),
      "phi_j start (j = 1..5), A = 0 (full) or the fixed potential (reduced).");
  m.def("energy", &compute_energy, py::arg("disc"), py::arg("state"), py::arg("spec"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("beta", &SolverConfig::beta)
      .def_readwrite("tol", &SolverConfig::tol)
      .def_readwrite("max_iter", &SolverConfig::max_iter)
      .def_readwrite("record_history", &SolverConfig::record_history);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("final_state", &SolveReport::final_state)
      .def_readonly("energies", &SolveReport::energies)
      .def_readonly("divergence_residuals", &SolveReport::divergence_residuals)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("diagnostic", &SolveReport::diagnostic);

  m.def(
      "solve",
      [](const Discretization& disc, const GLState& initial, const ProblemSpec& spec, const SolverConfig& config) {
        py::gil_scoped_release release;
        return solve(disc, initial, spec, config);
      },
      py::arg("disc"), py::arg("initial"), py::arg("spec"), py::arg("config") = SolverConfig{});

  py::class_<NetArchitecture>(m, "NetArchitecture")
      .def(py::init<>())
      .def_readwrite("width", &NetArchitecture::width)
      .def_readwrite("blocks", &NetArchitecture::blocks)
      .def_readwrite("out_dim", &NetArchitecture::out_dim)
      .def_readwrite("block_kind", &NetArchitecture::block_kind)
      .def_readwrite("activation", &NetArchitecture::activation)
      .def_readwrite("kappa_min", &NetArchitecture::kappa_min)
      .def_readwrite("kappa_max", &NetArchitecture::kappa_max);

  py::class_<GlennNet>(m, "GlennNet")
      .def(py::init<const NetArchitecture&, std::uint64_t>(), py::arg("arch"), py::arg("seed") = 0)
      .def_property_readonly("num_parameters", &GlennNet::num_parameters)
      .def_property(
          "parameters", [](const GlennNet& n) { return Eigen::VectorXd(n.parameters()); },
          [](GlennNet& n, const Eigen::VectorXd& p) {
            if (p.size() != n.num_parameters()) throw std::invalid_argument("parameter count mismatch");
            n.parameters() = p;
          })
      .def(
          "forward",
          [](const GlennNet& n, double x, double y, double kappa) {
            const NetOutput o = n.forward(Vec2(x, y), kappa);
            return py::make_tuple(o.value, o.jacobian);
          },
          py::arg("x"), py::arg("y"), py::arg("kappa"))
      .def("save", [](const GlennNet& n, const std::string& path) { save_checkpoint(n, path); })
      .def_static("load", &load_checkpoint);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("kappa_min", &TrainConfig::kappa_min)
      .def_readwrite("kappa_max", &TrainConfig::kappa_max)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("steps_per_epoch", &TrainConfig::steps_per_epoch)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lr_main", &TrainConfig::lr_main)
      .def_readwrite("lr_scaling", &TrainConfig::lr_scaling)
      .def_readwrite("warmup_steps", &TrainConfig::warmup_steps)
      .def_readwrite("weight_decay", &TrainConfig::weight_decay)
      .def_readwrite("seed", &TrainConfig::seed);

  m.def(
      "train",
      [](GlennNet& net, const TrainConfig& config, const ProblemSpec& spec) {
        py::gil_scoped_release release;
        return train(net, config, spec).loss_history;
      },
      py::arg("net"), py::arg("config"), py::arg("spec"), "Trains in place; returns the loss per step.");
  m.def("interpolate_nn", &interpolate_nn, py::arg("net"), py::arg("kappa"), py::arg("disc"), py::arg("spec"));

  m.def("dump_defaults", &dump_defaults);
  m.def("parse_kappa_list", &parse_kappa_list);
  m.def(
      "run_baseline",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const RunConfig config = parse_config(in);
        const EnergyTable table = [&] {
          py::gil_scoped_release release;
          return run_baseline(config);
        }();
        py::list rows;
        for (const auto& r : table.rows) {
          py::dict row;
          row["label"] = r.label;
          row["kappa"] = r.kappa;
          row["initial_energy"] = r.initial_energy;
          row["energy"] = r.energy;
          row["iterations"] = r.iterations;
          row["converged"] = r.converged;
          row["best"] = r.best;
          row["error"] = r.error;
          rows.append(row);
        }
        return rows;
      },
      py::arg("config_text"), "Baseline runs for an INI configuration given as text; one dict per run.");
}
