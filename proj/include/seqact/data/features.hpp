// Per-video clip feature storage.
//
// File format: magic "C3DF", u32 LE version (=1), u32 LE T (clips),
// u32 LE D (dimension), then T*D float32 LE in row-major order.
#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace seqact::data {

struct FeatureSequence {
  std::string video_id;
  // One row per clip. Stored as float32 so disk roundtrips are bit-exact.
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> clips;

  Eigen::Index length() const { return clips.rows(); }
  Eigen::Index dim() const { return clips.cols(); }
  Eigen::MatrixXd as_double() const { return clips.cast<double>(); }
};

void write_features(const FeatureSequence& seq,
                    const std::filesystem::path& path);

// Reads a feature file. The format carries no id, so video_id is taken from
// the argument, or from the file stem when empty.
FeatureSequence read_features(const std::filesystem::path& path,
                              const std::string& video_id = "");

}  // namespace seqact::data
