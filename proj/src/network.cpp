#include "glenn/network.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace glenn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// A "triple" stores value, d/dx1 and d/dx2 of a layer for a batch of B
// samples side by side: columns [0, B), [B, 2B), [2B, 3B).
auto part(MatrixXd& m, Index batch, int k) {
  return m.middleCols(k * batch, batch);
}
auto part(const MatrixXd& m, Index batch, int k) {
  return m.middleCols(k * batch, batch);
}

struct ActivationTape {
  MatrixXd pre;  // pre-activation triple
  MatrixXd df;   // f'(pre value)
  MatrixXd d2f;  // f''(pre value)
};

// out = act(pre) with tangents f'(p0) * pk.
MatrixXd activate_triple(Activation act, const MatrixXd& pre, Index batch, ActivationTape& tape) {
  tape.pre = pre;
  tape.df.resize(pre.rows(), batch);
  tape.d2f.resize(pre.rows(), batch);
  MatrixXd out(pre.rows(), pre.cols());
  for (Index j = 0; j < batch; ++j) {
    for (Index i = 0; i < pre.rows(); ++i) {
      const ActivationValue a = activate(act, pre(i, j));
      out(i, j) = a.f;
      tape.df(i, j) = a.df;
      tape.d2f(i, j) = a.d2f;
    }
  }
  for (int k = 1; k < 3; ++k) {
    part(out, batch, k) = tape.df.cwiseProduct(part(pre, batch, k));
  }
  return out;
}

MatrixXd activate_backward(const ActivationTape& tape, const MatrixXd& out_bar, Index batch) {
  MatrixXd pre_bar(out_bar.rows(), out_bar.cols());
  part(pre_bar, batch, 0) = part(out_bar, batch, 0).cwiseProduct(tape.df);
  for (int k = 1; k < 3; ++k) {
    part(pre_bar, batch, 0) +=
        part(out_bar, batch, k).cwiseProduct(tape.d2f).cwiseProduct(part(tape.pre, batch, k));
    part(pre_bar, batch, k) = part(out_bar, batch, k).cwiseProduct(tape.df);
  }
  return pre_bar;
}

// Entry-wise product of two triples with the product rule on the tangents.
MatrixXd product_triple(const MatrixXd& s, const MatrixXd& b, Index batch) {
  MatrixXd m(s.rows(), s.cols());
  part(m, batch, 0) = part(s, batch, 0).cwiseProduct(part(b, batch, 0));
  for (int k = 1; k < 3; ++k) {
    part(m, batch, k) = part(s, batch, k).cwiseProduct(part(b, batch, 0)) +
                        part(s, batch, 0).cwiseProduct(part(b, batch, k));
  }
  return m;
}

void product_backward(const MatrixXd& s, const MatrixXd& b, const MatrixXd& m_bar, Index batch,
                      MatrixXd& s_bar, MatrixXd& b_bar) {
  s_bar.resize(s.rows(), s.cols());
  b_bar.resize(b.rows(), b.cols());
  part(s_bar, batch, 0) = part(m_bar, batch, 0).cwiseProduct(part(b, batch, 0));
  part(b_bar, batch, 0) = part(m_bar, batch, 0).cwiseProduct(part(s, batch, 0));
  for (int k = 1; k < 3; ++k) {
    part(s_bar, batch, 0) += part(m_bar, batch, k).cwiseProduct(part(b, batch, k));
    part(b_bar, batch, 0) += part(m_bar, batch, k).cwiseProduct(part(s, batch, k));
    part(s_bar, batch, k) = part(m_bar, batch, k).cwiseProduct(part(b, batch, 0));
    part(b_bar, batch, k) = part(m_bar, batch, k).cwiseProduct(part(s, batch, 0));
  }
}

struct BlockTape {
  MatrixXd input;      // z
  MatrixXd hidden;     // DAGLU: h = act(W1 z)
  ActivationTape hidden_act;
  ActivationTape gate_act;
  MatrixXd gate;       // s = act(W2 .)
  MatrixXd linear;     // b = V .
  MatrixXd gated;      // m = s * b
  MatrixXd branch;     // residual branch r
};

struct Tape {
  Index batch = 0;
  MatrixXd input;  // 3 x B: x1, x2, kappa_scaled
  std::vector<BlockTape> blocks;
  MatrixXd last;   // input of the output map
  MatrixXd output;
};

}  // namespace

ActivationValue activate(Activation act, double x) {
  ActivationValue a;
  if (act == Activation::SiLU) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    a.f = x * s;
    a.df = s * (1.0 + x * (1.0 - s));
    a.d2f = s * (1.0 - s) * (2.0 + x * (1.0 - 2.0 * s));
  } else {
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    a.f = x * cdf;
    a.df = cdf + x * phi;
    a.d2f = phi * (2.0 - x * x);
  }
  return a;
}

namespace {

VectorXd activate_vector(Activation act, const VectorXd& x) {
  return x.unaryExpr([act](double v) { return activate(act, v).f; });
}

void check_block_shapes(const VectorXd& x, const MatrixXd& W1, const MatrixXd& W2, const MatrixXd& V,
                        const VectorXd& gamma) {
  const Index w = x.size();
  auto square = [w](const MatrixXd& m) { return m.rows() == w && m.cols() == w; };
  if (!square(W1) || !square(W2) || !square(V) || gamma.size() != w) {
    throw std::invalid_argument("block: matrix or scaling shapes do not match the input width");
  }
}

}  // namespace

VectorXd swiglu_block(const VectorXd& x, const MatrixXd& W1, const MatrixXd& W2, const MatrixXd& V,
                      Activation act, const VectorXd& gamma) {
  check_block_shapes(x, W1, W2, V, gamma);
  const VectorXd gated = activate_vector(act, W2 * x).cwiseProduct(V * x);
  return x + gamma.cwiseProduct(W1 * gated);
}

VectorXd daglu_block(const VectorXd& x, const MatrixXd& W1, const MatrixXd& W2, const MatrixXd& V,
                     Activation act, const VectorXd& gamma) {
  check_block_shapes(x, W1, W2, V, gamma);
  const VectorXd h = activate_vector(act, W1 * x);
  return x + gamma.cwiseProduct(activate_vector(act, W2 * h).cwiseProduct(V * h));
}

void NetArchitecture::validate() const {
  if (width < 1) throw std::invalid_argument("NetArchitecture: width must be >= 1");
  if (blocks < 0) throw std::invalid_argument("NetArchitecture: blocks must be >= 0");
  if (out_dim != 2 && out_dim != 4) throw std::invalid_argument("NetArchitecture: out_dim must be 2 or 4");
  if (!(kappa_min > 0.0 && kappa_min < kappa_max)) {
    throw std::invalid_argument("NetArchitecture: need 0 < kappa_min < kappa_max");
  }
}

std::vector<ParameterSegment> parameter_layout(const NetArchitecture& arch) {
  arch.validate();
  using Kind = ParameterSegment::Kind;
  std::vector<ParameterSegment> layout;
  Index offset = 0;
  auto add = [&](std::string name, Kind kind, Index rows, Index cols) {
    layout.push_back({std::move(name), kind, offset, rows, cols});
    offset += rows * cols;
  };
  const Index w = arch.width;
  add("input_map.weight", Kind::Weight, w, 3);
  add("input_map.bias", Kind::Bias, w, 1);
  for (int l = 0; l < arch.blocks; ++l) {
    const std::string prefix = "blocks." + std::to_string(l) + ".";
    add(prefix + "W1", Kind::Weight, w, w);
    add(prefix + "W2", Kind::Weight, w, w);
    add(prefix + "V", Kind::Weight, w, w);
    add(prefix + "gamma", Kind::Scaling, w, 1);
  }
  add("output_map.weight", Kind::Weight, arch.out_dim, w);
  add("output_map.bias", Kind::Bias, arch.out_dim, 1);
  return layout;
}

GlennNet::GlennNet(const NetArchitecture& arch, std::uint64_t seed)
    : arch_(arch), layout_(parameter_layout(arch)) {
  const auto& last = layout_.back();
  params_ = VectorXd::Zero(last.offset + last.size());
  std::mt19937_64 rng(seed);
  for (const auto& seg : layout_) {
    auto values = params_.segment(seg.offset, seg.size());
    switch (seg.kind) {
      case ParameterSegment::Kind::Weight: {
        const double bound = std::sqrt(6.0 / static_cast<double>(seg.cols));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index i = 0; i < values.size(); ++i) values[i] = dist(rng);
        break;
      }
      case ParameterSegment::Kind::Bias:
        values.setZero();
        break;
      case ParameterSegment::Kind::Scaling:
        values.setConstant(1.0 / (2.0 * arch.blocks));
        break;
    }
  }
}

GlennNet::GlennNet(const NetArchitecture& arch, VectorXd parameters)
    : arch_(arch), layout_(parameter_layout(arch)), params_(std::move(parameters)) {
  const auto& last = layout_.back();
  if (params_.size() != last.offset + last.size()) {
    throw std::invalid_argument("GlennNet: parameter vector has " + std::to_string(params_.size()) +
                                " entries, architecture needs " +
                                std::to_string(last.offset + last.size()));
  }
}

GlennNet::ConstMatrixMap GlennNet::matrix(std::size_t segment) const {
  const auto& s = layout_.at(segment);
  return ConstMatrixMap(params_.data() + s.offset, s.rows, s.cols);
}

GlennNet::MatrixMap GlennNet::matrix(std::size_t segment) {
  const auto& s = layout_.at(segment);
  return MatrixMap(params_.data() + s.offset, s.rows, s.cols);
}

double GlennNet::scale_kappa(double kappa) const {
  return 2.0 * (kappa - arch_.kappa_min) / (arch_.kappa_max - arch_.kappa_min) - 1.0;
}

namespace {

Tape run_forward(const GlennNet& net, const std::vector<Vec2>& points, const std::vector<double>& kappas) {
  if (points.size() != kappas.size()) throw std::invalid_argument("forward: points and kappas differ in size");
  const NetArchitecture& arch = net.architecture();
  Tape tape;
  const Index batch = static_cast<Index>(points.size());
  tape.batch = batch;
  tape.input.resize(3, batch);
  for (Index j = 0; j < batch; ++j) {
    tape.input(0, j) = points[static_cast<std::size_t>(j)].x();
    tape.input(1, j) = points[static_cast<std::size_t>(j)].y();
    tape.input(2, j) = net.scale_kappa(kappas[static_cast<std::size_t>(j)]);
  }

  const auto w_in = net.matrix(0);
  const auto b_in = net.matrix(1);
  MatrixXd z(arch.width, 3 * batch);
  part(z, batch, 0) = (w_in * tape.input).colwise() + b_in.col(0);
  part(z, batch, 1) = w_in.col(0).replicate(1, batch);
  part(z, batch, 2) = w_in.col(1).replicate(1, batch);

  tape.blocks.resize(static_cast<std::size_t>(arch.blocks));
  for (int l = 0; l < arch.blocks; ++l) {
    BlockTape& bt = tape.blocks[static_cast<std::size_t>(l)];
    const std::size_t s = net.block_segment(l);
    const auto w1 = net.matrix(s);
    const auto w2 = net.matrix(s + 1);
    const auto v = net.matrix(s + 2);
    const auto gamma = net.matrix(s + 3).col(0);
    bt.input = z;
    if (arch.block_kind == BlockKind::SwiGLU) {
      bt.gate = activate_triple(arch.activation, w2 * z, batch, bt.gate_act);
      bt.linear = v * z;
      bt.gated = product_triple(bt.gate, bt.linear, batch);
      bt.branch = w1 * bt.gated;
    } else {
      bt.hidden = activate_triple(arch.activation, w1 * z, batch, bt.hidden_act);
      bt.gate = activate_triple(arch.activation, w2 * bt.hidden, batch, bt.gate_act);
      bt.linear = v * bt.hidden;
      bt.gated = product_triple(bt.gate, bt.linear, batch);
      bt.branch = bt.gated;
    }
    z += gamma.asDiagonal() * bt.branch;
  }
  tape.last = z;
  const auto w_out = net.matrix(net.output_segment());
  const auto b_out = net.matrix(net.output_segment() + 1);
  tape.output = w_out * z;
  part(tape.output, batch, 0).colwise() += b_out.col(0);
  return tape;
}

BatchOutput split(const Tape& tape) {
  return {part(tape.output, tape.batch, 0), part(tape.output, tape.batch, 1),
          part(tape.output, tape.batch, 2)};
}

// Adjoint of the output triple -> parameter gradient.
VectorXd run_backward(const GlennNet& net, const Tape& tape, const MatrixXd& out_bar) {
  const NetArchitecture& arch = net.architecture();
  const Index batch = tape.batch;
  VectorXd grad = VectorXd::Zero(net.num_parameters());
  auto grad_matrix = [&](std::size_t segment) {
    const auto& s = net.layout()[segment];
    return Eigen::Map<MatrixXd>(grad.data() + s.offset, s.rows, s.cols);
  };

  const std::size_t so = net.output_segment();
  grad_matrix(so) = out_bar * tape.last.transpose();
  grad_matrix(so + 1) = part(out_bar, batch, 0).rowwise().sum();
  MatrixXd z_bar = net.matrix(so).transpose() * out_bar;

  for (int l = arch.blocks - 1; l >= 0; --l) {
    const BlockTape& bt = tape.blocks[static_cast<std::size_t>(l)];
    const std::size_t s = net.block_segment(l);
    const auto w1 = net.matrix(s);
    const auto w2 = net.matrix(s + 1);
    const auto v = net.matrix(s + 2);
    const auto gamma = net.matrix(s + 3).col(0);

    grad_matrix(s + 3) = z_bar.cwiseProduct(bt.branch).rowwise().sum();
    const MatrixXd branch_bar = gamma.asDiagonal() * z_bar;
    // z_bar already carries the identity path.
    MatrixXd gated_bar;
    if (arch.block_kind == BlockKind::SwiGLU) {
      grad_matrix(s) = branch_bar * bt.gated.transpose();
      gated_bar = w1.transpose() * branch_bar;
    } else {
      gated_bar = branch_bar;
    }
    MatrixXd gate_bar;
    MatrixXd linear_bar;
    product_backward(bt.gate, bt.linear, gated_bar, batch, gate_bar, linear_bar);
    const MatrixXd gate_pre_bar = activate_backward(bt.gate_act, gate_bar, batch);
    const MatrixXd& inner = arch.block_kind == BlockKind::SwiGLU ? bt.input : bt.hidden;
    grad_matrix(s + 1) = gate_pre_bar * inner.transpose();
    grad_matrix(s + 2) = linear_bar * inner.transpose();
    MatrixXd inner_bar = w2.transpose() * gate_pre_bar + v.transpose() * linear_bar;
    if (arch.block_kind == BlockKind::SwiGLU) {
      z_bar += inner_bar;
    } else {
      const MatrixXd hidden_pre_bar = activate_backward(bt.hidden_act, inner_bar, batch);
      grad_matrix(s) = hidden_pre_bar * bt.input.transpose();
      z_bar += w1.transpose() * hidden_pre_bar;
    }
  }

  auto w_in_bar = grad_matrix(0);
  w_in_bar = part(z_bar, batch, 0) * tape.input.transpose();
  w_in_bar.col(0) += part(z_bar, batch, 1).rowwise().sum();
  w_in_bar.col(1) += part(z_bar, batch, 2).rowwise().sum();
  grad_matrix(1) = part(z_bar, batch, 0).rowwise().sum();
  return grad;
}

// Pointwise integrand and its derivatives with respect to the output value
// (out_dim) and the spatial Jacobian (out_dim x 2).
struct PointLoss {
  double e = 0.0;
  Eigen::Vector4d d_value = Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 4, 2> d_jacobian = Eigen::Matrix<double, 4, 2>::Zero();
};

PointLoss point_loss(const Eigen::Ref<const VectorXd>& value, const Eigen::Ref<const VectorXd>& dx1,
                     const Eigen::Ref<const VectorXd>& dx2, const Vec2& x, double kappa,
                     const ProblemSpec& spec) {
  const bool full = !spec.reduced();
  const double ur = value[0];
  const double ui = value[1];
  const Vec2 grad_ur(dx1[0], dx2[0]);
  const Vec2 grad_ui(dx1[1], dx2[1]);
  const Vec2 A = full ? Vec2(value[2], value[3]) : spec.fixed_A->value(x);

  // q = (i/kappa) grad u + A u, split into real and imaginary parts.
  const Vec2 qr = A * ur - grad_ui / kappa;
  const Vec2 qi = A * ui + grad_ur / kappa;
  const double rho = ur * ur + ui * ui;
  PointLoss p;
  p.e = 0.5 * (qr.squaredNorm() + qi.squaredNorm() + 0.5 * (1.0 - rho) * (1.0 - rho));
  p.d_value[0] = qr.dot(A) - (1.0 - rho) * ur;
  p.d_value[1] = qi.dot(A) - (1.0 - rho) * ui;
  for (int k = 0; k < 2; ++k) {
    p.d_jacobian(0, k) = qi[k] / kappa;
    p.d_jacobian(1, k) = -qr[k] / kappa;
  }
  if (full) {
    const double h = spec.h_ext ? spec.h_ext(x) : 0.0;
    const double curl = dx1[3] - dx2[2] - h;
    const double div = dx1[2] + dx2[3];
    p.e += 0.5 * (curl * curl + div * div);
    for (int k = 0; k < 2; ++k) p.d_value[2 + k] = qr[k] * ur + qi[k] * ui;
    p.d_jacobian(3, 0) += curl;
    p.d_jacobian(2, 1) -= curl;
    p.d_jacobian(2, 0) += div;
    p.d_jacobian(3, 1) += div;
  }
  return p;
}

void check_model(const GlennNet& net, const ProblemSpec& spec) {
  spec.validate();
  if (net.architecture().model() != spec.model) {
    throw std::invalid_argument("network output dimension does not match the problem model");
  }
}

}  // namespace

NetOutput GlennNet::forward(const Vec2& x, double kappa) const {
  const Tape tape = run_forward(*this, {x}, {kappa});
  NetOutput out;
  out.value = part(tape.output, 1, 0);
  out.jacobian.resize(arch_.out_dim, 2);
  out.jacobian.col(0) = part(tape.output, 1, 1);
  out.jacobian.col(1) = part(tape.output, 1, 2);
  return out;
}

BatchOutput GlennNet::forward_batch(const std::vector<Vec2>& points, const std::vector<double>& kappas) const {
  return split(run_forward(*this, points, kappas));
}

double pointwise_loss(const NetOutput& out, const Vec2& x, double kappa, const ProblemSpec& spec) {
  spec.validate();
  return point_loss(out.value, out.jacobian.col(0), out.jacobian.col(1), x, kappa, spec).e;
}

LossAndGrad loss_and_grad(const GlennNet& net, const SampleBatch& batch, const ProblemSpec& spec) {
  check_model(net, spec);
  if (batch.size() == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  const Tape tape = run_forward(net, batch.points, batch.kappas);
  const Index n = tape.batch;
  const int out_dim = net.architecture().out_dim;
  MatrixXd out_bar(out_dim, 3 * n);
  LossAndGrad result;
  for (Index j = 0; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const double kappa = batch.kappas[sj];
    const PointLoss p = point_loss(tape.output.col(j), tape.output.col(n + j), tape.output.col(2 * n + j),
                                   batch.points[sj], kappa, spec);
    const double weight = kappa / static_cast<double>(n);
    result.loss += weight * p.e;
    out_bar.col(j) = weight * p.d_value.head(out_dim);
    out_bar.col(n + j) = weight * p.d_jacobian.col(0).head(out_dim);
    out_bar.col(2 * n + j) = weight * p.d_jacobian.col(1).head(out_dim);
  }
  result.grad = run_backward(net, tape, out_bar);
  return result;
}

double loss_value(const GlennNet& net, const SampleBatch& batch, const ProblemSpec& spec) {
  check_model(net, spec);
  if (batch.size() == 0) throw std::invalid_argument("loss_value: empty batch");
  const Tape tape = run_forward(net, batch.points, batch.kappas);
  const Index n = tape.batch;
  double loss = 0.0;
  for (Index j = 0; j < n; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const double kappa = batch.kappas[sj];
    loss += kappa * point_loss(tape.output.col(j), tape.output.col(n + j), tape.output.col(2 * n + j),
                               batch.points[sj], kappa, spec)
                        .e;
  }
  return loss / static_cast<double>(n);
}

}  // namespace glenn
