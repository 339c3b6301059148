#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "s2r/task_env.hpp"

namespace s2r {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Fully connected network with tanh hidden activations and a linear output.
// Batches are column-major: one sample per column.
class Mlp {
 public:
  // Activations kept by `forward` for the reverse pass. values[0] is the
  // input, values.back() the network output.
  struct Tape {
    std::vector<Eigen::MatrixXd> values;
  };

  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer> layers);

  // Orthogonal initialization: hidden layers with gain sqrt(2), the output
  // layer with `output_gain`, zero biases.
  static Mlp orthogonal(std::span<const int> sizes, double output_gain, Rng& rng);
  static Mlp zeros(std::span<const int> sizes);
  Mlp zeros_like() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Tape& tape) const;
  // Reverse pass: accumulates dL/dparams into `grad` given dL/doutput.
  void backward(const Tape& tape, const Eigen::MatrixXd& grad_output, Mlp& grad) const;

  // Throws ShapeError when consecutive layers do not chain.
  void validate() const;
  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace s2r
