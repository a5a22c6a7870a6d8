// Background-weighted negative log-likelihood over clip windows.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "seqact/train/windows.hpp"
#include "seqact/types.hpp"

namespace seqact::train {

struct LossConfig {
  // Weight applied to background (class 0) clips; activity clips weigh 1.
  double rho = 0.3;
};

// -alpha * log q(target), alpha = rho for background (target 0), 1 otherwise.
// `log_probs` holds K+1 log-probabilities.
double weighted_nll(const Eigen::VectorXd& log_probs, int target,
                    const LossConfig& config);

// Mean weighted NLL over every unmasked clip in the batch. `log_prob_seqs`
// holds one T x (K+1) matrix of log-probabilities per window.
double batch_loss(const std::vector<TrainWindow>& windows,
                  const std::vector<Eigen::MatrixXd>& log_prob_seqs,
                  const LossConfig& config);

// Same, from probability sequences (log is taken element-wise).
double batch_loss(const std::vector<TrainWindow>& windows,
                  const std::vector<ClipProbSequence>& prob_seqs,
                  const LossConfig& config);

// Gradient of the batch-mean weighted NLL w.r.t. one window's pre-softmax
// logits: row t is alpha_t * (probs_t - onehot(target_t)) / total_unmasked for
// unmasked clips, zero for padding. `total_unmasked` counts the whole batch.
Eigen::MatrixXd loss_logit_grads(const TrainWindow& window,
                                 const Eigen::MatrixXd& probs,
                                 const LossConfig& config,
                                 std::int64_t total_unmasked);

std::int64_t count_unmasked(const std::vector<TrainWindow>& windows);

}  // namespace seqact::train
