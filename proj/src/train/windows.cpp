#include "seqact/train/windows.hpp"

#include "seqact/common.hpp"

namespace seqact::train {

std::vector<TrainWindow> make_windows(
    const std::vector<LabeledSequence>& sequences, int seq_len,
    std::uint64_t seed) {
  if (seq_len < 1) throw Error("seq_len must be >= 1");
  std::vector<TrainWindow> windows;
  for (const auto& seq : sequences) {
    const auto T = seq.features.rows();
    if (T < 1) throw Error("sequence '" + seq.video_id + "' is empty");
    if (static_cast<Eigen::Index>(seq.targets.size()) != T)
      throw ShapeError("sequence '" + seq.video_id + "' has " +
                       std::to_string(T) + " clips but " +
                       std::to_string(seq.targets.size()) + " targets");
    for (Eigen::Index start = 0; start < T; start += seq_len) {
      const Eigen::Index used = std::min<Eigen::Index>(seq_len, T - start);
      TrainWindow w;
      w.video_id = seq.video_id;
      w.features = Eigen::MatrixXd::Zero(seq_len, seq.features.cols());
      w.features.topRows(used) = seq.features.middleRows(start, used);
      w.targets.assign(seq_len, 0);
      w.mask.assign(seq_len, 0);
      for (Eigen::Index t = 0; t < used; ++t) {
        w.targets[static_cast<std::size_t>(t)] =
            seq.targets[static_cast<std::size_t>(start + t)];
        w.mask[static_cast<std::size_t>(t)] = 1;
      }
      windows.push_back(std::move(w));
    }
  }
  Rng rng(seed);
  rng.shuffle(windows);
  return windows;
}

}  // namespace seqact::train
