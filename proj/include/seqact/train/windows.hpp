// Slicing labeled clip sequences into fixed-length training windows.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace seqact::train {

// A full video worth of features with one class target per clip
// (0 = background, 1..K = activity classes).
struct LabeledSequence {
  std::string video_id;
  Eigen::MatrixXd features;  // T x input_dim
  std::vector<int> targets;  // size T
};

// Fixed-length slice of a sequence. Rows past the source length are
// zero-padded and flagged by mask = 0 so they never contribute to the loss.
struct TrainWindow {
  std::string video_id;
  Eigen::MatrixXd features;        // seq_len x input_dim
  std::vector<int> targets;        // size seq_len (0 on padding)
  std::vector<std::uint8_t> mask;  // 1 = real clip, 0 = padding
};

// Cuts every sequence into consecutive non-overlapping windows of
// `seq_len` clips, zero-padding the tail window, then shuffles the
// collection with Rng(seed).
std::vector<TrainWindow> make_windows(
    const std::vector<LabeledSequence>& sequences, int seq_len,
    std::uint64_t seed);

}  // namespace seqact::train
