// Challenge metrics: classification mAP / Hit@3, temporal IoU, detection mAP,
// and the smoothing/threshold grid search.
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "seqact/types.hpp"

namespace seqact::eval {

// Intersection over union of [a_start, a_end) and [b_start, b_end) on the
// real line. Both intervals must be non-degenerate (end > start).
double temporal_iou(double a_start, double a_end, double b_start,
                    double b_end);

struct ClassificationResult {
  std::string video_id;
  // Entry c-1 scores activity class c; one score per class, so the ranked
  // list (score descending, class index ascending on ties) is implied.
  Eigen::VectorXd scores;
  int truth = 0;  // ground-truth activity class in [1, K]
};

// Fraction of videos whose ground-truth class ranks in the top 3.
double hit_at_3(const std::vector<ClassificationResult>& results);

// Per class: rank videos by that class's score (descending; ties by video_id
// ascending), average precision with non-interpolated precision-at-hit
// averaging. Mean over classes with at least one positive; zero-positive
// classes are excluded from the mean.
double classification_map(const std::vector<ClassificationResult>& results);

struct VideoDetections {
  std::string video_id;
  std::vector<Segment> predictions;
  std::vector<Segment> ground_truth;
};

// Per class: pool predictions across videos, sort by score descending (ties:
// video_id, then start, ascending), greedily match each prediction to the
// highest-IoU unmatched same-class ground-truth segment of the same video;
// a match counts only when IoU > iou_threshold (strict), and each
// ground-truth segment is used at most once. AP as in classification_map;
// mean over classes with at least one ground-truth segment.
double detection_map(const std::vector<VideoDetections>& results,
                     double iou_threshold = 0.5);

struct GridVideo {
  std::string video_id;
  ClipProbSequence probs;
  std::vector<Segment> ground_truth;
};

struct GridCell {
  int k = 0;
  double gamma = 0.0;
  double map = 0.0;
};

struct GridResult {
  std::vector<GridCell> cells;  // k-major, gamma-minor order
  GridCell best;                // first cell attaining the maximum map
};

// Classifies each video once, then for every (k, gamma) cell localizes with
// that smoothing/threshold and scores detection mAP at iou_threshold.
GridResult grid_search(const std::vector<GridVideo>& videos,
                       const std::vector<int>& k_values,
                       const std::vector<double>& gamma_values,
                       double iou_threshold = 0.5);

}  // namespace seqact::eval
