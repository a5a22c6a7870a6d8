// RMSprop with per-parameter mean-square accumulators.
#pragma once

#include "seqact/nn/params.hpp"

namespace seqact::train {

struct OptimizerState {
  double learning_rate = 1e-5;
  double decay = 0.9;
  double epsilon = 1e-8;
  nn::ModelParams mean_square;  // running average of squared gradients
};

OptimizerState make_optimizer_state(const nn::ModelParams& params,
                                    double learning_rate = 1e-5,
                                    double decay = 0.9,
                                    double epsilon = 1e-8);

// ms <- decay * ms + (1 - decay) * g^2
// p  <- p - lr * g / (sqrt(ms) + eps)
// Throws NumericError if gradients or updated parameters are not finite.
void rmsprop_step(nn::ModelParams& params, const nn::ModelParams& grads,
                  OptimizerState& state);

}  // namespace seqact::train
