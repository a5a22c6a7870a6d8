// Turns a clip probability sequence into a video label and scored segments.
#pragma once

#include <vector>

#include "seqact/types.hpp"

namespace seqact::post {

struct PostprocessConfig {
  int smooth_k = 5;     // mean-filter half window (window = 2k+1 clips)
  double gamma = 0.2;   // activity threshold; clips with activity > gamma kept
};

// Temporal mean filter: output row i averages input rows in
// [max(0, i-k), min(T-1, i+k)], normalized by the actual window size, so rows
// stay row-stochastic at the boundaries. k = 0 is the identity.
ClipProbSequence smooth(const ClipProbSequence& seq, int k);

struct VideoClassification {
  int label = 0;                 // activity class in [1, K]
  Eigen::VectorXd class_scores;  // K entries, renormalized to sum to 1
};

// Averages clip probabilities over the whole video and takes the argmax over
// activity classes (background is excluded; ties go to the lowest index).
VideoClassification classify_video(const ClipProbSequence& seq);

// Per-clip probability that any activity is happening: 1 - P(background).
Eigen::VectorXd activity_probability(const ClipProbSequence& seq);

// Smooths, thresholds the activity probability at gamma (strict >), and
// merges maximal runs of kept clips into segments labeled with the video's
// predicted class. Segment score = mean smoothed activity probability over
// the segment's clips. Clip i covers [i, i+1) * clip_duration_s.
std::vector<Segment> localize(const ClipProbSequence& seq, int video_label,
                              const PostprocessConfig& config);

}  // namespace seqact::post
