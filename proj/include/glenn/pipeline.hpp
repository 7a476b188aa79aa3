#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glenn/config.hpp"
#include "glenn/minimizer.hpp"
#include "glenn/network.hpp"

namespace glenn {

struct EnergyRow {
  std::string label;  // initializer: phi1..phi5, nn, constant
  double kappa = 0.0;
  double initial_energy = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  bool best = false;  // lowest energy among the rows with this kappa
  std::string error;  // non-empty if the run failed
};

struct EnergyTable {
  std::vector<EnergyRow> rows;

  /// Sets `best` on the lowest successful energy per kappa.
  void mark_best();
  [[nodiscard]] const EnergyRow* find(const std::string& label, double kappa) const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Short decimal form of kappa used in file names ("10", "12.5").
std::string format_kappa(double kappa);

/// Initial state from the network: u at the P2 nodes, A from edge moments
/// (2-point Gauss) made discretely divergence-free; the reduced model keeps
/// the fixed potential.
GLState interpolate_nn(const GlennNet& net, double kappa, const Discretization& disc, const ProblemSpec& spec);

/// Initial state for one initializer label of the configuration.
GLState initial_state(const RunConfig& config, const std::string& label, double kappa,
                      const Discretization& disc, const ProblemSpec& spec, const GlennNet* net);

/// Writes history_<label>_<kappa>.csv and field_<label>_<kappa>.vtk when
/// `out_dir` is non-empty.
struct RunOutputs {
  std::filesystem::path out_dir;
  bool write_history = true;
  bool write_fields = true;
};

/// phi_j baselines (A0 = 0 in the full model) for every kappa of the config.
EnergyTable run_baseline(const RunConfig& config, const RunOutputs& outputs = {});

/// Network initial values followed by the FE solver, one row per kappa.
EnergyTable run_hybrid(const RunConfig& config, const GlennNet& net, const RunOutputs& outputs = {});

/// Legacy VTK: point data |u|^2, Re u, Im u at the mesh vertices; cell data
/// A1, A2 (element averages) and curl A.
void export_fields(const Discretization& disc, const GLState& state, const std::filesystem::path& path);

/// Nodal density |u|^2 at all P2 nodes: columns node, x, y, density.
void write_density_csv(const Discretization& disc, const GLState& state, const std::filesystem::path& path);
std::vector<double> read_density_csv(const std::filesystem::path& path);

void write_history_csv(const SolveReport& report, const std::filesystem::path& path);

}  // namespace glenn
