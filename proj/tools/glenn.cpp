#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "glenn/config.hpp"
#include "glenn/pipeline.hpp"
#include "glenn/training.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string kappa;
  std::optional<int> mesh_n;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* app, CommonOptions& opts) {
  app->add_option("--config", opts.config, "Configuration file (INI)")->check(CLI::ExistingFile);
  app->add_option("--kappa", opts.kappa, "Comma-separated kappa values");
  app->add_option("--mesh-n", opts.mesh_n, "Cells per side of the mesh")->check(CLI::PositiveNumber);
  app->add_option("--out", opts.out, "Output directory");
  app->add_option("--seed", opts.seed, "Training seed");
}

glenn::RunConfig resolve(const CommonOptions& opts, glenn::RunMode mode) {
  glenn::RunConfig config = opts.config.empty() ? glenn::RunConfig{} : glenn::load_config(opts.config);
  config.mode = mode;
  if (!opts.kappa.empty()) config.kappas = glenn::parse_kappa_list(opts.kappa);
  if (opts.mesh_n) config.mesh_n = *opts.mesh_n;
  if (!opts.out.empty()) config.out_dir = opts.out;
  if (opts.seed) config.train.seed = *opts.seed;
  for (const auto& w : config.validate()) std::cerr << "warning: " << w << '\n';
  std::filesystem::create_directories(config.out_dir);
  return config;
}

void report(const glenn::EnergyTable& table) {
  for (const auto& row : table.rows) {
    if (!row.error.empty()) {
      std::cerr << row.label << " kappa=" << glenn::format_kappa(row.kappa) << " failed: " << row.error << '\n';
      continue;
    }
    std::printf("%-8s kappa=%-6s E=%.8f iterations=%d%s%s\n", row.label.c_str(),
                glenn::format_kappa(row.kappa).c_str(), row.energy, row.iterations,
                row.converged ? "" : " (not converged)", row.best ? " *" : "");
  }
}

int failures(const glenn::EnergyTable& table) {
  int n = 0;
  for (const auto& row : table.rows) n += row.error.empty() ? 0 : 1;
  return n;
}

int run_solve(const CommonOptions& opts) {
  const glenn::RunConfig config = resolve(opts, glenn::RunMode::Solve);
  const glenn::EnergyTable table = glenn::run_baseline(config, {config.out_dir});
  table.write_csv(config.out_dir / "energies.csv");
  report(table);
  return failures(table) == 0 ? 0 : 1;
}

int run_train(const CommonOptions& opts) {
  const glenn::RunConfig config = resolve(opts, glenn::RunMode::Train);
  glenn::GlennNet net(config.architecture(), config.train.seed);
  const long total = config.train.total_steps();
  const long every = std::max(1L, total / 20);
  std::ofstream history(config.out_dir / "train_history.csv");
  history << "step,loss,lr_main,lr_scaling\n";
  const auto result = glenn::train(net, config.train, config.problem(),
                                   [&](long step, double loss, const glenn::LearningRates& lr) {
                                     char line[128];
                                     std::snprintf(line, sizeof(line), "%ld,%.17g,%.17g,%.17g\n", step, loss,
                                                   lr.main, lr.scaling);
                                     history << line;
                                     if ((step + 1) % every == 0 || step + 1 == total) {
                                       std::fprintf(stderr, "step %ld/%ld loss %.6f\n", step + 1, total, loss);
                                     }
                                   });
  history.flush();
  if (!history) throw std::runtime_error("error while writing train_history.csv");
  const auto path = config.out_dir / "checkpoint.glenn";
  glenn::save_checkpoint(net, path.string());
  std::printf("trained %ld steps, final loss %.8f, checkpoint %s\n", total,
              result.loss_history.empty() ? 0.0 : result.loss_history.back(), path.string().c_str());
  return 0;
}

int run_hybrid(const CommonOptions& opts) {
  const glenn::RunConfig config = resolve(opts, glenn::RunMode::Hybrid);
  const glenn::GlennNet net = glenn::load_checkpoint(config.checkpoint_path().string());
  const glenn::EnergyTable table = glenn::run_hybrid(config, net, {config.out_dir});
  table.write_csv(config.out_dir / "energies.csv");
  report(table);
  return failures(table) == 0 ? 0 : 1;
}

int run_export(const CommonOptions& opts) {
  const glenn::RunConfig config = resolve(opts, glenn::RunMode::Export);
  std::optional<glenn::GlennNet> net;
  for (const auto& label : config.initial) {
    if (label == "nn") net = glenn::load_checkpoint(config.checkpoint_path().string());
  }
  const glenn::ProblemSpec spec = config.problem();
  const glenn::Discretization disc(std::make_shared<const glenn::Mesh2D>(
      config.domain == glenn::Domain::LShape ? glenn::generate_l_shape(config.mesh_n)
                                             : glenn::generate_unit_square(config.mesh_n)));
  glenn::EnergyTable table;
  for (double kappa : config.kappas) {
    for (const auto& label : config.initial) {
      glenn::GLState state = glenn::initial_state(config, label, kappa, disc, spec, net ? &*net : nullptr);
      const std::string tag = label + "_" + glenn::format_kappa(kappa);
      glenn::export_fields(disc, state, config.out_dir / ("field_" + tag + ".vtk"));
      glenn::write_density_csv(disc, state, config.out_dir / ("density_" + tag + ".csv"));
      glenn::EnergyRow row;
      row.label = label;
      row.kappa = kappa;
      row.initial_energy = row.energy = glenn::cached_energy(disc, state, spec);
      row.converged = false;
      table.rows.push_back(row);
    }
  }
  table.mark_best();
  table.write_csv(config.out_dir / "energies.csv");
  report(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ginzburg-Landau energy minimization with finite elements and neural-network initial values"};
  app.require_subcommand(1);

  CommonOptions opts;
  auto* solve = app.add_subcommand("solve", "Run the FE solver from the heuristic initial values");
  auto* train = app.add_subcommand("train", "Train a network and write checkpoint.glenn");
  auto* hybrid = app.add_subcommand("hybrid", "Interpolate a trained network and run the FE solver");
  auto* exp = app.add_subcommand("export", "Export initial states as VTK and CSV without solving");
  for (auto* sub : {solve, train, hybrid, exp}) add_common(sub, opts);

  bool dump = false;
  auto* config = app.add_subcommand("config", "Configuration helpers");
  config->add_flag("--dump-defaults", dump, "Print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*config) {
      if (!dump) {
        std::cerr << "config: nothing to do (use --dump-defaults)\n";
        return 2;
      }
      std::cout << glenn::dump_defaults();
      return 0;
    }
    if (*solve) return run_solve(opts);
    if (*train) return run_train(opts);
    if (*hybrid) return run_hybrid(opts);
    if (*exp) return run_export(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
