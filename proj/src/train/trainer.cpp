#include "seqact/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>

#include "seqact/common.hpp"
#include "seqact/nn/model.hpp"
#include "seqact/train/loss.hpp"
#include "seqact/train/rmsprop.hpp"

namespace seqact::train {

namespace {

void check_config(const TrainConfig& config) {
  if (config.epochs < 0) throw Error("epochs must be >= 0");
  if (config.batch_size < 1) throw Error("batch_size must be >= 1");
  if (config.seq_len < 1) throw Error("seq_len must be >= 1");
  if (config.threads < 1) throw Error("threads must be >= 1");
}

void check_dataset(const std::vector<LabeledSequence>& dataset,
                   const nn::ModelParams& params) {
  if (dataset.empty()) throw Error("training dataset is empty");
  const auto K = params.num_classes();
  for (const auto& seq : dataset) {
    if (seq.features.cols() != params.input_dim)
      throw ShapeError("sequence '" + seq.video_id + "' has feature dim " +
                       std::to_string(seq.features.cols()) +
                       " but the model expects " +
                       std::to_string(params.input_dim));
    for (int target : seq.targets)
      if (target < 0 || target > K)
        throw Error("sequence '" + seq.video_id + "' has target " +
                    std::to_string(target) + " outside [0, " +
                    std::to_string(K) + "]");
  }
}

struct ChunkResult {
  std::size_t begin;
  nn::ModelParams grads;
  double loss_sum = 0.0;
};

}  // namespace

TrainResult train(const std::vector<LabeledSequence>& dataset,
                  const TrainConfig& config) {
  if (config.num_classes < 1) throw Error("num_classes must be >= 1");
  auto params = nn::init_params(config.num_layers, config.cells,
                                config.num_classes, config.input_dim,
                                mix_seed(config.seed, kInitSalt),
                                config.dropout_p);
  return train_from(std::move(params), dataset, config);
}

TrainResult train_from(nn::ModelParams params,
                       const std::vector<LabeledSequence>& dataset,
                       const TrainConfig& config) {
  check_config(config);
  nn::validate(params);
  check_dataset(dataset, params);

  const std::uint64_t shuffle_base = mix_seed(config.seed, kShuffleSalt);
  const std::uint64_t dropout_base = mix_seed(config.seed, kDropoutSalt);
  auto windows = make_windows(dataset, config.seq_len, shuffle_base);

  const LossConfig loss_cfg{config.rho};
  auto state = make_optimizer_state(params, config.learning_rate, config.decay,
                                    config.epsilon);

  TrainResult result;
  result.epoch_losses.reserve(static_cast<std::size_t>(config.epochs));

  std::vector<std::size_t> order(windows.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix_seed(shuffle_base, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);
    const std::uint64_t epoch_dropout =
        mix_seed(dropout_base, static_cast<std::uint64_t>(epoch));

    double epoch_sum = 0.0;
    std::int64_t epoch_clips = 0;
    int step = 0;
    for (std::size_t batch_begin = 0; batch_begin < order.size();
         batch_begin += static_cast<std::size_t>(config.batch_size), ++step) {
      const std::size_t batch_len =
          std::min<std::size_t>(config.batch_size, order.size() - batch_begin);

      std::int64_t batch_clips = 0;
      for (std::size_t i = 0; i < batch_len; ++i)
        for (auto m : windows[order[batch_begin + i]].mask)
          batch_clips += m ? 1 : 0;

      try {
        std::vector<ChunkResult> chunks;
        std::mutex chunks_mutex;
        parallel_chunks(batch_len, config.threads,
                        [&](std::size_t lo, std::size_t hi) {
          ChunkResult local;
          local.begin = lo;
          local.grads = nn::zeros_like(params);
          for (std::size_t i = lo; i < hi; ++i) {
            const auto& w = windows[order[batch_begin + i]];
            const std::uint64_t dseed = mix_seed(
                epoch_dropout, static_cast<std::uint64_t>(batch_begin + i));
            auto fwd =
                nn::model_forward(params, w.features, nn::RunMode::kTrain, dseed);
            for (Eigen::Index t = 0; t < fwd.trace.log_probs.rows(); ++t) {
              if (!w.mask[static_cast<std::size_t>(t)]) continue;
              local.loss_sum += weighted_nll(
                  fwd.trace.log_probs.row(t).transpose(),
                  w.targets[static_cast<std::size_t>(t)], loss_cfg);
            }
            auto logit_grads =
                loss_logit_grads(w, fwd.trace.probs, loss_cfg, batch_clips);
            auto wgrads = nn::model_backward(params, fwd.trace, logit_grads);
            nn::add_params(local.grads, wgrads);
          }
          std::lock_guard<std::mutex> lock(chunks_mutex);
          chunks.push_back(std::move(local));
        });

        std::sort(chunks.begin(), chunks.end(),
                  [](const ChunkResult& a, const ChunkResult& b) {
                    return a.begin < b.begin;
                  });
        auto batch_grads = nn::zeros_like(params);
        double batch_sum = 0.0;
        for (auto& chunk : chunks) {
          nn::add_params(batch_grads, chunk.grads);
          batch_sum += chunk.loss_sum;
        }
        const double batch_mean =
            batch_sum / static_cast<double>(batch_clips);
        if (!std::isfinite(batch_mean))
          throw NumericError("training loss is not finite");
        rmsprop_step(params, batch_grads, state);
        epoch_sum += batch_sum;
        epoch_clips += batch_clips;
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " (epoch " +
                           std::to_string(epoch + 1) + ", step " +
                           std::to_string(step + 1) + ")");
      }
    }
    result.epoch_losses.push_back(epoch_sum /
                                  static_cast<double>(epoch_clips));
  }

  result.params = std::move(params);
  return result;
}

}  // namespace seqact::train
