#include "seqact/train/loss.hpp"

#include <cmath>
#include <string>

#include "seqact/common.hpp"

namespace seqact::train {

namespace {

double clip_weight(int target, const LossConfig& config) {
  return target == 0 ? config.rho : 1.0;
}

void check_config(const LossConfig& config) {
  if (!(config.rho > 0.0) || config.rho > 1.0)
    throw Error("rho must lie in (0, 1], got " + std::to_string(config.rho));
}

}  // namespace

double weighted_nll(const Eigen::VectorXd& log_probs, int target,
                    const LossConfig& config) {
  check_config(config);
  if (target < 0 || target >= log_probs.size())
    throw Error("target " + std::to_string(target) + " out of range for " +
                std::to_string(log_probs.size()) + " classes");
  const double lp = log_probs[target];
  if (std::isnan(lp)) throw NumericError("log-probability is NaN");
  return -clip_weight(target, config) * lp;
}

std::int64_t count_unmasked(const std::vector<TrainWindow>& windows) {
  std::int64_t n = 0;
  for (const auto& w : windows)
    for (auto m : w.mask) n += m ? 1 : 0;
  return n;
}

double batch_loss(const std::vector<TrainWindow>& windows,
                  const std::vector<Eigen::MatrixXd>& log_prob_seqs,
                  const LossConfig& config) {
  check_config(config);
  if (windows.size() != log_prob_seqs.size())
    throw ShapeError("batch has " + std::to_string(windows.size()) +
                     " windows but " + std::to_string(log_prob_seqs.size()) +
                     " probability sequences");
  const std::int64_t total = count_unmasked(windows);
  if (total == 0) throw Error("batch contains no unmasked clips");
  double sum = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    const auto& lp = log_prob_seqs[i];
    if (lp.rows() != static_cast<Eigen::Index>(w.mask.size()))
      throw ShapeError("window '" + w.video_id + "' has " +
                       std::to_string(w.mask.size()) + " clips but " +
                       std::to_string(lp.rows()) + " probability rows");
    for (Eigen::Index t = 0; t < lp.rows(); ++t) {
      if (!w.mask[static_cast<std::size_t>(t)]) continue;
      sum += weighted_nll(lp.row(t).transpose(),
                          w.targets[static_cast<std::size_t>(t)], config);
    }
  }
  return sum / static_cast<double>(total);
}

double batch_loss(const std::vector<TrainWindow>& windows,
                  const std::vector<ClipProbSequence>& prob_seqs,
                  const LossConfig& config) {
  std::vector<Eigen::MatrixXd> log_probs;
  log_probs.reserve(prob_seqs.size());
  for (const auto& seq : prob_seqs)
    log_probs.push_back(seq.probs.array().log().matrix());
  return batch_loss(windows, log_probs, config);
}

Eigen::MatrixXd loss_logit_grads(const TrainWindow& window,
                                 const Eigen::MatrixXd& probs,
                                 const LossConfig& config,
                                 std::int64_t total_unmasked) {
  check_config(config);
  if (total_unmasked < 1) throw Error("total_unmasked must be >= 1");
  if (probs.rows() != static_cast<Eigen::Index>(window.mask.size()))
    throw ShapeError("window '" + window.video_id + "' has " +
                     std::to_string(window.mask.size()) + " clips but " +
                     std::to_string(probs.rows()) + " probability rows");
  Eigen::MatrixXd grads = Eigen::MatrixXd::Zero(probs.rows(), probs.cols());
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    if (!window.mask[static_cast<std::size_t>(t)]) continue;
    const int target = window.targets[static_cast<std::size_t>(t)];
    if (target < 0 || target >= probs.cols())
      throw Error("target " + std::to_string(target) + " out of range for " +
                  std::to_string(probs.cols()) + " classes");
    const double alpha =
        clip_weight(target, config) / static_cast<double>(total_unmasked);
    grads.row(t) = alpha * probs.row(t);
    grads(t, target) -= alpha;
  }
  return grads;
}

}  // namespace seqact::train
