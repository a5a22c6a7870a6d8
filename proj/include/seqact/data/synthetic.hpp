// Deterministic synthetic dataset: gaussian class clusters on random unit
// directions, packed into untrimmed clip sequences with exact ground truth.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "seqact/data/manifest.hpp"

namespace seqact::data {

struct SyntheticSpec {
  int num_classes = 10;    // K activity classes (background is extra)
  int feature_dim = 32;    // D
  int train_videos = 200;
  int validation_videos = 50;
  int testing_videos = 0;
  int min_clips = 20;
  int max_clips = 60;
  int min_segments = 1;
  int max_segments = 3;
  // Floors that keep segments detectable after smoothing: a segment never
  // shrinks below min_segment_clips and two segments are separated by at
  // least min_gap_clips background clips.
  int min_segment_clips = 10;
  int min_gap_clips = 12;
  double class_separation = 1.0;  // centroid norm
  double noise_sigma = 0.25;      // per-dimension gaussian noise
  double fps = 16.0;              // clip duration = 16/fps seconds
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  std::vector<VideoRecord> records;            // train, validation, testing
  std::vector<std::string> labels;             // K class names
  Eigen::MatrixXd centroids;                   // (K+1) x D; row 0 background
  std::vector<std::vector<int>> clip_labels;   // generator's own bookkeeping
  std::filesystem::path manifest_path;
  std::filesystem::path labels_path;
};

// Writes features/<video_id>.feat, manifest.jsonl and labels.txt under
// out_dir. Byte-identical output for identical (spec, out_dir contents).
// Throws when the segment floors cannot fit into min_clips.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec,
                                    const std::filesystem::path& out_dir);

}  // namespace seqact::data
