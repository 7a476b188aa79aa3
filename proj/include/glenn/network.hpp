#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "glenn/gl_core.hpp"
#include "glenn/mesh.hpp"

namespace glenn {

enum class BlockKind { SwiGLU, DAGLU };
enum class Activation { SiLU, GELU };

/// Value and first two derivatives of an activation at one point.
struct ActivationValue {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

ActivationValue activate(Activation act, double x);

/// x + gamma * W1 (act(W2 x) * V x)
Eigen::VectorXd swiglu_block(const Eigen::VectorXd& x, const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2,
                             const Eigen::MatrixXd& V, Activation act, const Eigen::VectorXd& gamma);
/// h = act(W1 x); x + gamma * (act(W2 h) * V h)
Eigen::VectorXd daglu_block(const Eigen::VectorXd& x, const Eigen::MatrixXd& W1, const Eigen::MatrixXd& W2,
                            const Eigen::MatrixXd& V, Activation act, const Eigen::VectorXd& gamma);

struct NetArchitecture {
  int width = 32;
  int blocks = 4;
  int out_dim = 2;  // 2: (Re u, Im u); 4: (Re u, Im u, A1, A2)
  BlockKind block_kind = BlockKind::SwiGLU;
  Activation activation = Activation::SiLU;
  double kappa_min = 5.0;  // kappa input is rescaled from [kappa_min, kappa_max] to [-1, 1]
  double kappa_max = 15.0;

  void validate() const;
  [[nodiscard]] Model model() const { return out_dim == 4 ? Model::Full : Model::Reduced; }
  bool operator==(const NetArchitecture&) const = default;
};

/// Position of one parameter array inside the flat parameter vector.
struct ParameterSegment {
  enum class Kind { Weight, Bias, Scaling };
  std::string name;
  Kind kind;
  Eigen::Index offset;
  Eigen::Index rows;
  Eigen::Index cols;
  [[nodiscard]] Eigen::Index size() const { return rows * cols; }
};

/// Flat ordering: input_map (W, b), blocks in order (W1, W2, V, gamma),
/// output_map (W, b). Matrices are column-major.
std::vector<ParameterSegment> parameter_layout(const NetArchitecture& arch);

struct NetOutput {
  Eigen::VectorXd value;      // out_dim
  Eigen::MatrixXd jacobian;   // out_dim x 2, derivatives in (x1, x2)
};

/// Network outputs for a batch: value and the two spatial derivatives, one
/// column per sample.
struct BatchOutput {
  Eigen::MatrixXd value;
  Eigen::MatrixXd d_x1;
  Eigen::MatrixXd d_x2;
};

class GlennNet {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  /// He-uniform weights, zero biases, gamma = 1 / (2 L).
  GlennNet(const NetArchitecture& arch, std::uint64_t seed);
  /// Takes ownership of an existing parameter vector (e.g. from a checkpoint).
  GlennNet(const NetArchitecture& arch, Eigen::VectorXd parameters);

  [[nodiscard]] const NetArchitecture& architecture() const { return arch_; }
  [[nodiscard]] const std::vector<ParameterSegment>& layout() const { return layout_; }
  [[nodiscard]] Eigen::Index num_parameters() const { return params_.size(); }
  [[nodiscard]] const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }

  [[nodiscard]] ConstMatrixMap matrix(std::size_t segment) const;
  MatrixMap matrix(std::size_t segment);
  [[nodiscard]] std::size_t block_segment(int block) const { return 2 + 4 * static_cast<std::size_t>(block); }
  [[nodiscard]] std::size_t output_segment() const { return 2 + 4 * static_cast<std::size_t>(arch_.blocks); }

  [[nodiscard]] double scale_kappa(double kappa) const;

  [[nodiscard]] NetOutput forward(const Vec2& x, double kappa) const;
  [[nodiscard]] BatchOutput forward_batch(const std::vector<Vec2>& points,
                                          const std::vector<double>& kappas) const;

 private:
  NetArchitecture arch_;
  std::vector<ParameterSegment> layout_;
  Eigen::VectorXd params_;
};

struct SampleBatch {
  std::vector<Vec2> points;
  std::vector<double> kappas;
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Pointwise integrand e(x, kappa) of the training loss for one network
/// output, without the kappa weight.
double pointwise_loss(const NetOutput& out, const Vec2& x, double kappa, const ProblemSpec& spec);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;  // same layout as the parameters
};

/// Mean over the batch of kappa * e(x, kappa) and its exact parameter gradient.
LossAndGrad loss_and_grad(const GlennNet& net, const SampleBatch& batch, const ProblemSpec& spec);
double loss_value(const GlennNet& net, const SampleBatch& batch, const ProblemSpec& spec);

}  // namespace glenn
