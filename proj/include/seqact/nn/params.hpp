// Model parameter containers, shape validation, traversal and initialization.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "seqact/common.hpp"

namespace seqact::nn {

// Gate order used everywhere, including on disk.
enum Gate : int {
  kInputGate = 0,
  kForgetGate = 1,
  kOutputGate = 2,
  kCandidateGate = 3,
};
inline constexpr int kGates = 4;

struct LstmLayerParams {
  std::array<Eigen::MatrixXd, kGates> input_weights;      // cells x input_dim
  std::array<Eigen::MatrixXd, kGates> recurrent_weights;  // cells x cells
  std::array<Eigen::VectorXd, kGates> biases;             // cells

  Eigen::Index cells() const { return input_weights[0].rows(); }
  Eigen::Index input_dim() const { return input_weights[0].cols(); }
};

struct DenseSoftmaxParams {
  Eigen::MatrixXd weights;  // (K+1) x cells
  Eigen::VectorXd bias;     // K+1

  Eigen::Index outputs() const { return weights.rows(); }  // K+1
  Eigen::Index activity_classes() const { return weights.rows() - 1; }
};

struct ModelParams {
  std::vector<LstmLayerParams> lstm_layers;  // at least one
  DenseSoftmaxParams output;
  Eigen::Index input_dim = 4096;
  double dropout_p = 0.5;

  Eigen::Index num_layers() const {
    return static_cast<Eigen::Index>(lstm_layers.size());
  }
  // Cells of the last LSTM layer (the dense layer's input width).
  Eigen::Index cells() const { return lstm_layers.back().cells(); }
  // K: number of activity classes (output width is K+1).
  Eigen::Index num_classes() const { return output.activity_classes(); }
};

// Throws ShapeError when layer chaining or output dimensions are inconsistent,
// or dropout_p is outside [0, 1).
void validate(const ModelParams& p);

// Visits every parameter block in serialization order: per layer the input
// weights i,f,o,g, then recurrent weights i,f,o,g, then biases i,f,o,g;
// finally dense weights and dense bias.
template <typename Params, typename F>
void visit_params(Params& p, F&& f) {
  for (auto& layer : p.lstm_layers) {
    for (auto& m : layer.input_weights) f(m);
    for (auto& m : layer.recurrent_weights) f(m);
    for (auto& b : layer.biases) f(b);
  }
  f(p.output.weights);
  f(p.output.bias);
}

// Flat views over every scalar, in visit_params order.
std::vector<std::span<double>> param_spans(ModelParams& p);
std::vector<std::span<const double>> param_spans(const ModelParams& p);

std::size_t param_count(const ModelParams& p);
std::vector<double> flatten(const ModelParams& p);
void unflatten(ModelParams& p, std::span<const double> values);

// Same shapes and metadata, all parameter values zero. Doubles as the
// container for gradients and optimizer accumulators.
ModelParams zeros_like(const ModelParams& p);

// dst += src, element-wise over every parameter block.
void add_params(ModelParams& dst, const ModelParams& src);

bool all_finite(const ModelParams& p);

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] (fan_in = the matrix's
// input width), forget-gate biases 1, all other biases 0. Deterministic in
// `seed`.
ModelParams init_params(int num_layers, int cells, int num_classes,
                        int input_dim, std::uint64_t seed,
                        double dropout_p = 0.5);

}  // namespace seqact::nn
