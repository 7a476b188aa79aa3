#include "glenn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace glenn {

void TrainConfig::validate() const {
  if (!(kappa_min > 0.0 && kappa_min < kappa_max)) {
    throw std::invalid_argument("TrainConfig: need 0 < kappa_min < kappa_max");
  }
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (steps_per_epoch < 1) throw std::invalid_argument("TrainConfig: steps_per_epoch must be >= 1");
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (!(lr_main > 0.0) || !(lr_scaling > 0.0)) {
    throw std::invalid_argument("TrainConfig: learning rates must be positive");
  }
  if (warmup_steps < 0 || final_linear_steps < 0) {
    throw std::invalid_argument("TrainConfig: step counts must be nonnegative");
  }
  if (!(min_lr >= 0.0 && min_lr <= lr_main)) {
    throw std::invalid_argument("TrainConfig: min_lr must lie in [0, lr_main]");
  }
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) {
    throw std::invalid_argument("TrainConfig: decay_rate must lie in (0, 1]");
  }
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be nonnegative");
}

LearningRates lr_schedule(long step, const TrainConfig& config) {
  if (step < 0) throw std::invalid_argument("lr_schedule: step must be nonnegative");
  double factor = 1.0;  // lr_main / target
  const long warmup = config.warmup_steps;
  if (step < warmup) {
    factor = static_cast<double>(step) / static_cast<double>(warmup);
  } else if (config.decay == DecayKind::Exponential) {
    const double epochs = static_cast<double>(step - warmup) / static_cast<double>(config.steps_per_epoch);
    factor = std::pow(config.decay_rate, epochs);
  } else {
    const double floor = config.min_lr / config.lr_main;
    const long span = std::max(0L, config.total_steps() - warmup - config.final_linear_steps);
    const long since = step - warmup;
    if (since <= span && span > 0) {
      const double frac = static_cast<double>(since) / static_cast<double>(span);
      factor = floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    } else if (config.final_linear_steps > 0) {
      const double tail = static_cast<double>(since - span) / static_cast<double>(config.final_linear_steps);
      factor = floor * std::max(0.0, 1.0 - tail);
    } else {
      factor = floor;
    }
  }
  return {config.lr_main * factor, config.lr_scaling * factor};
}

AdamWState make_adamw_state(const GlennNet& net) {
  AdamWState s;
  s.m = Eigen::VectorXd::Zero(net.num_parameters());
  s.v = Eigen::VectorXd::Zero(net.num_parameters());
  return s;
}

void adamw_step(GlennNet& net, const Eigen::VectorXd& grad, AdamWState& state, double lr_main,
                double lr_scaling, double weight_decay) {
  if (grad.size() != net.num_parameters() || state.m.size() != net.num_parameters() ||
      state.v.size() != net.num_parameters()) {
    throw std::invalid_argument("adamw_step: gradient or state does not match the parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  Eigen::VectorXd& p = net.parameters();
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
  for (const auto& seg : net.layout()) {
    const bool scaling = seg.kind == ParameterSegment::Kind::Scaling;
    const double lr = scaling ? lr_scaling : lr_main;
    auto ps = p.segment(seg.offset, seg.size());
    if (seg.kind == ParameterSegment::Kind::Weight && weight_decay > 0.0) ps *= 1.0 - lr * weight_decay;
    const auto m_hat = state.m.segment(seg.offset, seg.size()) / c1;
    const auto v_hat = state.v.segment(seg.offset, seg.size()) / c2;
    ps.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
    if (scaling) ps = ps.cwiseMax(kMinScaling).cwiseMin(1.0);
  }
}

SampleBatch sample_points(std::size_t count, Domain domain, double kappa_min, double kappa_max,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> kappa(kappa_min, kappa_max);
  SampleBatch batch;
  batch.points.reserve(count);
  batch.kappas.reserve(count);
  while (batch.points.size() < count) {
    const Vec2 x(unit(rng), unit(rng));
    if (domain == Domain::LShape && x.x() > 0.5 && x.y() > 0.5) continue;
    batch.points.push_back(x);
    batch.kappas.push_back(kappa(rng));
  }
  return batch;
}

TrainResult train(GlennNet& net, const TrainConfig& config, const ProblemSpec& spec,
                  const TrainProgress& progress) {
  config.validate();
  spec.validate();
  if (net.architecture().model() != spec.model) {
    throw std::invalid_argument("train: network output dimension does not match the problem model");
  }
  TrainResult result;
  result.loss_history.reserve(static_cast<std::size_t>(config.total_steps()));
  AdamWState state = make_adamw_state(net);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    const SampleBatch bulk = sample_points(batch_size * static_cast<std::size_t>(config.steps_per_epoch),
                                           spec.domain, config.kappa_min, config.kappa_max, rng);
    for (int s = 0; s < config.steps_per_epoch; ++s) {
      const auto first = static_cast<std::ptrdiff_t>(static_cast<std::size_t>(s) * batch_size);
      const auto last = first + static_cast<std::ptrdiff_t>(batch_size);
      SampleBatch batch;
      batch.points.assign(bulk.points.begin() + first, bulk.points.begin() + last);
      batch.kappas.assign(bulk.kappas.begin() + first, bulk.kappas.begin() + last);
      const LossAndGrad lg = loss_and_grad(net, batch, spec);
      if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
        throw TrainingError("non-finite loss at step " + std::to_string(step), step);
      }
      // Adam step t (1-based) uses the schedule value at t.
      const LearningRates lr = lr_schedule(step + 1, config);
      adamw_step(net, lg.grad, state, lr.main, lr.scaling, config.weight_decay);
      result.loss_history.push_back(lg.loss);
      if (progress) progress(step, lg.loss, lr);
      ++step;
    }
  }
  return result;
}

namespace {

constexpr char kMagic[8] = {'G', 'L', 'E', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint " + path + ": truncated file");
  return value;
}

}  // namespace

void save_checkpoint(const GlennNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const NetArchitecture& a = net.architecture();
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::int32_t>(a.width));
  write_pod(out, static_cast<std::int32_t>(a.blocks));
  write_pod(out, static_cast<std::int32_t>(a.out_dim));
  write_pod(out, static_cast<std::int32_t>(a.block_kind));
  write_pod(out, static_cast<std::int32_t>(a.activation));
  write_pod(out, a.kappa_min);
  write_pod(out, a.kappa_max);
  write_pod(out, static_cast<std::uint64_t>(net.num_parameters()));
  out.write(reinterpret_cast<const char*>(net.parameters().data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(net.num_parameters())));
  if (!out) throw std::runtime_error("error while writing checkpoint: " + path);
}

GlennNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint " + path + ": not a glenn checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw std::runtime_error("checkpoint " + path + ": unsupported version " + std::to_string(version));
  }
  NetArchitecture a;
  a.width = read_pod<std::int32_t>(in, path);
  a.blocks = read_pod<std::int32_t>(in, path);
  a.out_dim = read_pod<std::int32_t>(in, path);
  const auto kind = read_pod<std::int32_t>(in, path);
  const auto act = read_pod<std::int32_t>(in, path);
  if (kind < 0 || kind > 1 || act < 0 || act > 1) {
    throw std::runtime_error("checkpoint " + path + ": invalid block kind or activation");
  }
  a.block_kind = static_cast<BlockKind>(kind);
  a.activation = static_cast<Activation>(act);
  a.kappa_min = read_pod<double>(in, path);
  a.kappa_max = read_pod<double>(in, path);
  a.validate();
  const auto count = read_pod<std::uint64_t>(in, path);
  const auto& last = parameter_layout(a).back();
  if (count != static_cast<std::uint64_t>(last.offset + last.size())) {
    throw std::runtime_error("checkpoint " + path + ": parameter count does not match the architecture");
  }
  Eigen::VectorXd params(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(sizeof(double) * count));
  if (!in) throw std::runtime_error("checkpoint " + path + ": truncated file");
  if (!params.allFinite()) throw std::runtime_error("checkpoint " + path + ": non-finite parameters");
  return GlennNet(a, std::move(params));
}

}  // namespace glenn
