// Minibatch epoch loop: forward, weighted NLL, BPTT, RMSprop.
#pragma once

#include <cstdint>
#include <vector>

#include "seqact/nn/params.hpp"
#include "seqact/train/windows.hpp"

namespace seqact::train {

struct TrainConfig {
  int num_layers = 1;
  int cells = 512;
  int num_classes = 0;  // K; required, activity classes excluding background
  int input_dim = 4096;
  double rho = 0.3;
  double learning_rate = 1e-5;
  double decay = 0.9;
  double epsilon = 1e-8;
  double dropout_p = 0.5;
  int epochs = 100;
  int batch_size = 256;
  int seq_len = 20;
  int threads = 1;  // note: the exact float rounding depends on (seed, threads)
  std::uint64_t seed = 0;
};

struct TrainResult {
  nn::ModelParams params;
  std::vector<double> epoch_losses;  // mean weighted NLL per epoch
};

// Salts applied to config.seed to derive independent random streams.
inline constexpr std::uint64_t kInitSalt = 0x1;
inline constexpr std::uint64_t kShuffleSalt = 0x2;
inline constexpr std::uint64_t kDropoutSalt = 0x3;

// Initializes a fresh model from the config geometry and runs the epoch loop.
TrainResult train(const std::vector<LabeledSequence>& dataset,
                  const TrainConfig& config);

// Runs the epoch loop from externally supplied initial parameters.
TrainResult train_from(nn::ModelParams params,
                       const std::vector<LabeledSequence>& dataset,
                       const TrainConfig& config);

}  // namespace seqact::train
