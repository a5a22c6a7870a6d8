// LSTM recurrence, dropout, softmax output and exact gradients through time.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "seqact/nn/params.hpp"

namespace seqact::nn {

struct LstmState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;
};

LstmState zero_state(Eigen::Index cells);

// Everything the backward pass needs from one cell evaluation.
struct LstmStepCache {
  Eigen::VectorXd input;        // x as seen by this layer at this step
  Eigen::VectorXd prev_hidden;
  Eigen::VectorXd prev_cell;
  std::array<Eigen::VectorXd, kGates> gates;  // post-activation i, f, o, g
  Eigen::VectorXd cell;         // c_t
  Eigen::VectorXd cell_tanh;    // tanh(c_t)
  Eigen::VectorXd hidden;       // h_t
};

// One LSTM step:
//   i = sigmoid(W_i x + U_i h + b_i)      f = sigmoid(W_f x + U_f h + b_f)
//   o = sigmoid(W_o x + U_o h + b_o)      g = tanh   (W_g x + U_g h + b_g)
//   c' = f .* c + i .* g                  h' = o .* tanh(c')
std::pair<LstmState, LstmStepCache> lstm_cell_step(const LstmLayerParams& layer,
                                                   const Eigen::VectorXd& x,
                                                   const LstmState& state);

enum class RunMode { kTrain, kEval };

struct ForwardTrace {
  // steps[layer][t]; steps.size() equals the model's layer count.
  std::vector<std::vector<LstmStepCache>> steps;
  // Inverted-dropout masks, already scaled by 1/(1-p); all ones in eval mode.
  // One mask per sequence, reused across timesteps.
  Eigen::VectorXd input_mask;   // over the feature dimension
  Eigen::VectorXd output_mask;  // over the last layer's cells
  Eigen::MatrixXd dropped_output;  // T x cells, input rows of the dense layer
  Eigen::MatrixXd logits;          // T x (K+1)
  Eigen::MatrixXd log_probs;       // T x (K+1)
  Eigen::MatrixXd probs;           // T x (K+1)
  bool train_mode = false;

  Eigen::Index length() const { return probs.rows(); }
};

struct ForwardResult {
  Eigen::MatrixXd probs;  // T x (K+1), rows sum to 1
  ForwardTrace trace;
};

// Runs the full model over a T x input_dim feature sequence. In train mode,
// inverted dropout is applied to the input features and to the last LSTM
// layer's output, with per-sequence masks drawn deterministically from
// rng_seed. Eval mode is dropout-free and a pure function of its inputs.
ForwardResult model_forward(const ModelParams& params,
                            const Eigen::MatrixXd& features, RunMode mode,
                            std::uint64_t rng_seed);

// Exact gradients of a scalar loss with respect to every parameter, given the
// loss gradient w.r.t. the pre-softmax logits at each timestep (T x (K+1)).
// The result is shape-isomorphic to `params`.
ModelParams model_backward(const ModelParams& params, const ForwardTrace& trace,
                           const Eigen::MatrixXd& logit_grads);

// Numerically stable softmax helpers (max subtraction).
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace seqact::nn
