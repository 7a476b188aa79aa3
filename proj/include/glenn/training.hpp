#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "glenn/network.hpp"

namespace glenn {

enum class DecayKind { Cosine, Exponential };

struct TrainConfig {
  double kappa_min = 5.0;
  double kappa_max = 15.0;
  int batch_size = 256;
  int steps_per_epoch = 100;
  int epochs = 5;
  double lr_main = 1e-3;
  double lr_scaling = 1e-3;
  int warmup_steps = 50;
  DecayKind decay = DecayKind::Cosine;
  double min_lr = 1e-5;        // cosine floor for lr_main
  int final_linear_steps = 0;  // linear decay from the floor to 0 after the cosine phase
  double decay_rate = 0.9;     // exponential: factor per epoch
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] long total_steps() const { return static_cast<long>(steps_per_epoch) * epochs; }
};

struct LearningRates {
  double main = 0.0;
  double scaling = 0.0;
};

/// Linear warmup, then cosine decay to min_lr followed by a linear tail to 0,
/// or exponential decay by `decay_rate` per epoch. The scaling rate follows
/// the same shape relative to its own target.
LearningRates lr_schedule(long step, const TrainConfig& config);

struct AdamWState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamWState make_adamw_state(const GlennNet& net);

constexpr double kMinScaling = 1e-6;

/// Decoupled weight decay (weights only); scaling vectors use `lr_scaling` and
/// are clamped to [1e-6, 1] afterwards.
void adamw_step(GlennNet& net, const Eigen::VectorXd& grad, AdamWState& state, double lr_main,
                double lr_scaling, double weight_decay);

/// Uniform samples of Omega x [kappa_min, kappa_max] (rejection sampling on the L-shape).
SampleBatch sample_points(std::size_t count, Domain domain, double kappa_min, double kappa_max,
                          std::mt19937_64& rng);

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] long step() const { return step_; }

 private:
  long step_;
};

struct TrainResult {
  std::vector<double> loss_history;  // one entry per optimizer step
};

/// Called after each step with (step, loss, learning rates); may be empty.
using TrainProgress = std::function<void(long, double, const LearningRates&)>;

/// steps_per_epoch x epochs AdamW steps; the samples of epoch e are drawn in
/// bulk from a generator seeded with (seed, e).
TrainResult train(GlennNet& net, const TrainConfig& config, const ProblemSpec& spec,
                  const TrainProgress& progress = {});

void save_checkpoint(const GlennNet& net, const std::string& path);
GlennNet load_checkpoint(const std::string& path);

}  // namespace glenn
