// Default hyperparameters, shared by the CLI and the config snapshot test.
#pragma once

namespace seqact::defaults {

inline constexpr int kLstmLayers = 1;
inline constexpr int kLstmCells = 512;
inline constexpr int kInputDim = 4096;
inline constexpr double kDropout = 0.5;
inline constexpr double kBackgroundWeight = 0.3;  // rho
inline constexpr double kLearningRate = 1e-5;
inline constexpr int kEpochs = 100;
inline constexpr int kBatchSize = 256;
inline constexpr int kSeqLen = 20;
inline constexpr int kSmoothK = 5;
inline constexpr double kGamma = 0.2;
inline constexpr double kIouThreshold = 0.5;

}  // namespace seqact::defaults
