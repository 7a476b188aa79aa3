#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "glenn/gl_core.hpp"
#include "glenn/minimizer.hpp"
#include "glenn/network.hpp"
#include "glenn/training.hpp"

namespace glenn {

enum class RunMode { Solve, Train, Hybrid, Export };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  RunMode mode = RunMode::Solve;
  Model model = Model::Reduced;
  Domain domain = Domain::UnitSquare;
  int mesh_n = 64;
  std::vector<double> kappas{10.0};
  /// Initializers: phi1..phi5, constant, nn.
  std::vector<std::string> initial{"phi1", "phi2", "phi3", "phi4", "phi5"};
  double constant_value = 1.0;
  std::filesystem::path checkpoint;  // empty: <out>/checkpoint.glenn
  std::filesystem::path out_dir = "glenn_out";

  double beta = 0.0;
  double tol = 1e-12;
  int max_iter = 100000;

  /// out_dim and the kappa range are taken from the model and [train].
  NetArchitecture network;
  TrainConfig train;

  [[nodiscard]] NetArchitecture architecture() const;
  [[nodiscard]] ProblemSpec problem() const { return ProblemSpec::standard(model, domain); }
  [[nodiscard]] SolverConfig solver() const;
  [[nodiscard]] std::filesystem::path checkpoint_path() const;
  /// Throws ConfigError on missing or inconsistent fields; returns warnings.
  std::vector<std::string> validate() const;
};

/// INI file with sections [problem], [mesh], [run], [solver], [network], [train].
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in);
/// Defaults in the same format, with a comment per key.
std::string dump_defaults();

std::vector<double> parse_kappa_list(const std::string& text);
RunMode parse_mode(const std::string& text);

}  // namespace glenn
