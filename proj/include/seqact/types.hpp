// Cross-module domain types.
#pragma once

#include <Eigen/Dense>
#include <string>

#include "seqact/common.hpp"

namespace seqact {

// Per-video sequence of class probabilities, one row per 16-frame clip.
// Column 0 is the background class; columns 1..K are activity classes.
struct ClipProbSequence {
  Eigen::MatrixXd probs;      // T x (K+1), rows sum to 1
  double clip_duration_s = 1.0;  // 16 / fps

  Eigen::Index length() const { return probs.rows(); }
  Eigen::Index num_classes() const { return probs.cols() - 1; }
};

// Throws unless every row sums to 1 within `tol` and entries are in [0, 1].
void validate_row_stochastic(const ClipProbSequence& seq, double tol = 1e-6);

// A scored temporal interval carrying one activity label (never background).
struct Segment {
  int label = 0;        // activity class in [1, K]
  double start_s = 0.0;
  double end_s = 0.0;
  double score = 0.0;   // in [0, 1]
};

}  // namespace seqact
