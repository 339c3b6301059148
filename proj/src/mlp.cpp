#include "s2r/mlp.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "s2r/errors.hpp"

namespace s2r {

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {}

namespace {

Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = std::max(rows, cols);
  const int m = std::min(rows, cols);
  Eigen::MatrixXd a(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
  // Sign fix so the result is uniformly (Haar) distributed.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * w;
}

}  // namespace

Mlp Mlp::orthogonal(std::span<const int> sizes, double output_gain, Rng& rng) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const bool last = i + 2 == sizes.size();
    const double gain = last ? output_gain : std::sqrt(2.0);
    layers.push_back({orthogonal_matrix(sizes[i + 1], sizes[i], gain, rng),
                      Eigen::VectorXd::Zero(sizes[i + 1])});
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::zeros(std::span<const int> sizes) {
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    layers.push_back({Eigen::MatrixXd::Zero(sizes[i + 1], sizes[i]),
                      Eigen::VectorXd::Zero(sizes[i + 1])});
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::zeros_like() const {
  std::vector<DenseLayer> layers;
  layers.reserve(layers_.size());
  for (const auto& l : layers_) {
    layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                      Eigen::VectorXd::Zero(l.bias.size())});
  }
  return Mlp(std::move(layers));
}

void Mlp::validate() const {
  if (layers_.empty()) throw ShapeError("network has no layers");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rows() != l.bias.size() || l.weight.rows() == 0 || l.weight.cols() == 0) {
      throw ShapeError("layer " + std::to_string(i) + ": bias does not match weight rows");
    }
    if (i > 0 && l.weight.cols() != layers_[i - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": input width does not match previous layer");
    }
  }
}

int Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input) const {
  Eigen::MatrixXd x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * x;
    z.colwise() += layers_[i].bias;
    x = i + 1 < layers_.size() ? Eigen::MatrixXd(z.array().tanh()) : std::move(z);
  }
  return x;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Tape& tape) const {
  tape.values.clear();
  tape.values.push_back(input);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = layers_[i].weight * tape.values.back();
    z.colwise() += layers_[i].bias;
    if (i + 1 < layers_.size()) z = z.array().tanh();
    tape.values.push_back(std::move(z));
  }
  return tape.values.back();
}

void Mlp::backward(const Tape& tape, const Eigen::MatrixXd& grad_output, Mlp& grad) const {
  Eigen::MatrixXd delta = grad_output;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      // tanh'(z) = 1 - tanh(z)^2, with tanh(z) stored on the tape.
      delta.array() *= 1.0 - tape.values[k + 1].array().square();
    }
    grad.layers_[k].weight.noalias() += delta * tape.values[k].transpose();
    grad.layers_[k].bias += delta.rowwise().sum();
    if (k > 0) delta = layers_[k].weight.transpose() * delta;
  }
}

}  // namespace s2r
