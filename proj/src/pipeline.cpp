#include "glenn/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "glenn/quadrature.hpp"

namespace glenn {

namespace {

std::string fixed8(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8f", v);
  return buf;
}

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("error while writing " + path.string());
}

std::shared_ptr<const Mesh2D> make_mesh(const RunConfig& config) {
  return std::make_shared<const Mesh2D>(config.domain == Domain::LShape ? generate_l_shape(config.mesh_n)
                                                                        : generate_unit_square(config.mesh_n));
}

void write_outputs(const RunOutputs& outputs, const Discretization& disc, const SolveReport& report,
                   const std::string& label, double kappa) {
  if (outputs.out_dir.empty()) return;
  const std::string tag = label + "_" + format_kappa(kappa);
  if (outputs.write_history) write_history_csv(report, outputs.out_dir / ("history_" + tag + ".csv"));
  if (outputs.write_fields) {
    export_fields(disc, report.final_state, outputs.out_dir / ("field_" + tag + ".vtk"));
    write_density_csv(disc, report.final_state, outputs.out_dir / ("density_" + tag + ".csv"));
  }
}

EnergyRow run_one(const Discretization& disc, const ProblemSpec& spec, const SolverConfig& solver,
                  const std::string& label, double kappa, const std::function<GLState()>& make_initial,
                  const RunOutputs& outputs) {
  EnergyRow row;
  row.label = label;
  row.kappa = kappa;
  row.initial_energy = std::numeric_limits<double>::quiet_NaN();
  row.energy = std::numeric_limits<double>::quiet_NaN();
  try {
    GLState initial = make_initial();
    row.initial_energy = cached_energy(disc, initial, spec);
    const SolveReport report = solve(disc, std::move(initial), spec, solver);
    row.energy = report.energies.back();
    row.iterations = report.iterations;
    row.converged = report.converged;
    write_outputs(outputs, disc, report, label, kappa);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

void EnergyTable::mark_best() {
  for (auto& row : rows) row.best = false;
  for (auto& row : rows) {
    if (!row.error.empty()) continue;
    EnergyRow* best = nullptr;
    for (auto& other : rows) {
      if (other.kappa != row.kappa || !other.error.empty()) continue;
      if (!best || other.energy < best->energy) best = &other;
    }
    if (best) best->best = true;
  }
}

const EnergyRow* EnergyTable::find(const std::string& label, double kappa) const {
  for (const auto& row : rows) {
    if (row.label == label && row.kappa == kappa) return &row;
  }
  return nullptr;
}

void EnergyTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out = open_output(path);
  out << "label,kappa,initial_energy,energy,iterations,converged,best,error\n";
  for (const auto& row : rows) {
    std::string error = row.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << row.label << ',' << format_kappa(row.kappa) << ',' << fixed8(row.initial_energy) << ','
        << fixed8(row.energy) << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << ','
        << (row.best ? 1 : 0) << ',' << error << '\n';
  }
  finish(out, path);
}

std::string format_kappa(double kappa) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), kappa);
  return std::string(buf, res.ptr);
}

GLState interpolate_nn(const GlennNet& net, double kappa, const Discretization& disc, const ProblemSpec& spec) {
  spec.validate();
  if (net.architecture().model() != spec.model) {
    throw std::invalid_argument("interpolate_nn: network output dimension does not match the problem model");
  }
  const std::vector<Vec2> nodes = disc.order_node_coordinates();
  const BatchOutput values = net.forward_batch(nodes, std::vector<double>(nodes.size(), kappa));
  OrderField u(disc.num_order_nodes());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    u.set(i, Complex(values.value(0, col), values.value(1, col)));
  }
  if (u.coeffs.cwiseAbs().maxCoeff() < 1e-10) {
    throw std::invalid_argument("interpolate_nn: the network order parameter vanishes on the mesh");
  }
  if (spec.reduced()) return GLState(std::move(u), reference_potential(disc, spec), kappa);

  const Mesh2D& mesh = disc.mesh();
  std::vector<Vec2> points;
  points.reserve(2 * mesh.num_edges());
  for (const auto& e : mesh.edges()) {
    const Vec2& a = mesh.vertices()[e[0]];
    const Vec2& b = mesh.vertices()[e[1]];
    for (double s : kEdgeGaussPoints) points.push_back(a + s * (b - a));
  }
  const BatchOutput edge_values = net.forward_batch(points, std::vector<double>(points.size(), kappa));
  PotentialField A(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Vec2 span = mesh.vertices()[mesh.edges()[e][1]] - mesh.vertices()[mesh.edges()[e][0]];
    double moment = 0.0;
    for (int q = 0; q < 2; ++q) {
      const auto col = static_cast<Eigen::Index>(2 * e + static_cast<std::size_t>(q));
      moment += 0.5 * Vec2(edge_values.value(2, col), edge_values.value(3, col)).dot(span);
    }
    A.coeffs[static_cast<Eigen::Index>(e)] = moment;
  }
  return GLState(std::move(u), disc.project_div_free(A), kappa);
}

GLState initial_state(const RunConfig& config, const std::string& label, double kappa,
                      const Discretization& disc, const ProblemSpec& spec, const GlennNet* net) {
  if (label.size() == 4 && label.rfind("phi", 0) == 0) {
    return make_state(disc, spec, initial_value(label[3] - '0', config.domain), kappa);
  }
  if (label == "constant") return make_state(disc, spec, constant_order(Complex(config.constant_value, 0.0)), kappa);
  if (label == "nn") {
    if (!net) throw std::invalid_argument("initializer nn needs a network checkpoint");
    return interpolate_nn(*net, kappa, disc, spec);
  }
  throw std::invalid_argument("unknown initializer '" + label + "'");
}

EnergyTable run_baseline(const RunConfig& config, const RunOutputs& outputs) {
  config.validate();
  EnergyTable table;
  if (config.kappas.empty()) return table;
  const ProblemSpec spec = config.problem();
  const Discretization disc(make_mesh(config));
  const SolverConfig solver = config.solver();
  for (double kappa : config.kappas) {
    for (const auto& label : config.initial) {
      table.rows.push_back(run_one(disc, spec, solver, label, kappa,
                                   [&] { return initial_state(config, label, kappa, disc, spec, nullptr); },
                                   outputs));
    }
  }
  table.mark_best();
  return table;
}

EnergyTable run_hybrid(const RunConfig& config, const GlennNet& net, const RunOutputs& outputs) {
  config.validate();
  if (net.architecture().model() != config.model) {
    throw std::invalid_argument("run_hybrid: checkpoint was trained for the " +
                                std::string(net.architecture().model() == Model::Full ? "full" : "reduced") +
                                " model but the configuration asks for the " +
                                std::string(config.model == Model::Full ? "full" : "reduced") + " model");
  }
  EnergyTable table;
  if (config.kappas.empty()) return table;
  const ProblemSpec spec = config.problem();
  const Discretization disc(make_mesh(config));
  const SolverConfig solver = config.solver();
  for (double kappa : config.kappas) {
    table.rows.push_back(
        run_one(disc, spec, solver, "nn", kappa, [&] { return interpolate_nn(net, kappa, disc, spec); }, outputs));
  }
  table.mark_best();
  return table;
}

void export_fields(const Discretization& disc, const GLState& state, const std::filesystem::path& path) {
  const Mesh2D& mesh = disc.mesh();
  if (state.u().num_nodes() != disc.num_order_nodes() || state.A().size() != disc.num_potential_dofs()) {
    throw std::invalid_argument("export_fields: state does not match the discretization");
  }
  std::ofstream out = open_output(path);
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\nglenn fields kappa=" << state.kappa() << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) out << "5\n";

  // P2 vertex nodes carry the nodal values at the mesh vertices.
  out << "POINT_DATA " << mesh.num_vertices() << '\n';
  auto point_scalars = [&](const char* name, auto&& f) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) out << f(state.u().at(i)) << '\n';
  };
  point_scalars("density", [](Complex z) { return std::norm(z); });
  point_scalars("re_u", [](Complex z) { return z.real(); });
  point_scalars("im_u", [](Complex z) { return z.imag(); });

  // Cell averages of A over the element quadrature; curl A is elementwise constant.
  std::vector<Vec2> a_mean(mesh.num_triangles(), Vec2::Zero());
  std::vector<double> curl(mesh.num_triangles(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    double area = 0.0;
    for (std::size_t q = 0; q < disc.rule().size(); ++q) {
      const PointBasis b = disc.basis(t, q);
      const PointFields f = disc.evaluate(b, t, state.u(), state.A());
      a_mean[t] += b.weight * f.A;
      curl[t] += b.weight * f.curl_A;
      area += b.weight;
    }
    a_mean[t] /= area;
    curl[t] /= area;
  }
  out << "CELL_DATA " << mesh.num_triangles() << '\n';
  out << "SCALARS A1 double 1\nLOOKUP_TABLE default\n";
  for (const auto& a : a_mean) out << a.x() << '\n';
  out << "SCALARS A2 double 1\nLOOKUP_TABLE default\n";
  for (const auto& a : a_mean) out << a.y() << '\n';
  out << "SCALARS curl_A double 1\nLOOKUP_TABLE default\n";
  for (double c : curl) out << c << '\n';
  finish(out, path);
}

void write_density_csv(const Discretization& disc, const GLState& state, const std::filesystem::path& path) {
  if (state.u().num_nodes() != disc.num_order_nodes()) {
    throw std::invalid_argument("write_density_csv: state does not match the discretization");
  }
  const std::vector<Vec2> nodes = disc.order_node_coordinates();
  std::ofstream out = open_output(path);
  out << "node,x,y,density\n";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << i << ',' << full_precision(nodes[i].x()) << ',' << full_precision(nodes[i].y()) << ','
        << full_precision(std::norm(state.u().at(i))) << '\n';
  }
  finish(out, path);
}

std::vector<double> read_density_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "node,x,y,density") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<double> density;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) throw std::runtime_error(path.string() + ": malformed line '" + line + "'");
    density.push_back(std::stod(line.substr(pos + 1)));
  }
  return density;
}

void write_history_csv(const SolveReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  const bool div = !report.divergence_residuals.empty();
  out << "iteration,energy,gamma,tau" << (div ? ",div_residual" : "") << '\n';
  for (std::size_t k = 0; k < report.energies.size(); ++k) {
    out << k << ',' << full_precision(report.energies[k]) << ',';
    if (k > 0 && k - 1 < report.gammas.size()) {
      out << full_precision(report.gammas[k - 1]) << ',' << full_precision(report.taus[k - 1]);
    } else {
      out << ',';
    }
    if (div) out << ',' << (k < report.divergence_residuals.size() ? full_precision(report.divergence_residuals[k]) : "");
    out << '\n';
  }
  finish(out, path);
}

}  // namespace glenn
