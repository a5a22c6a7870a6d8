// Video metadata: JSON-lines manifest, labels file, clip-level targets.
//
// Manifest: one JSON object per line with fields video_id, feature_path,
// fps, num_clips, subset ("train"|"validation"|"testing"), and
// annotations: [{"label": int, "segment": [start_s, end_s]}, ...].
// feature_path is resolved relative to the manifest's directory.
//
// Labels file: plain text, one class name per line; line i (1-based) names
// class i. Background is the implicit class 0 and has no line.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace seqact::data {

enum class Subset { kTrain, kValidation, kTesting };

Subset parse_subset(const std::string& name);  // rejects unknown names
std::string subset_name(Subset subset);

struct AnnotationSpan {
  int label = 0;  // activity class in [1, K]
  double start_s = 0.0;
  double end_s = 0.0;
};

struct VideoRecord {
  std::string video_id;
  std::string feature_path;
  double fps = 16.0;
  int num_clips = 0;
  Subset subset = Subset::kTrain;
  std::vector<AnnotationSpan> annotations;

  double clip_duration_s() const { return 16.0 / fps; }
  double duration_s() const { return num_clips * clip_duration_s(); }
};

std::vector<VideoRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<VideoRecord>& records,
                    const std::filesystem::path& path);

// Records of one subset, in manifest order.
std::vector<VideoRecord> split(const std::vector<VideoRecord>& records,
                               Subset subset);

std::vector<std::string> read_labels(const std::filesystem::path& path);
void write_labels(const std::vector<std::string>& labels,
                  const std::filesystem::path& path);

// feature_path resolved against the manifest's directory (absolute paths
// pass through).
std::filesystem::path resolve_feature_path(
    const std::filesystem::path& manifest_path, const VideoRecord& record);

// Clip-level targets: clip i spans [i, i+1) * clip_duration_s; it takes an
// annotation's label when their overlap exceeds half the clip duration,
// otherwise background 0. Among competing annotations the larger overlap
// wins; ties go to the earlier annotation.
std::vector<int> clip_targets(const VideoRecord& record, int num_classes);

}  // namespace seqact::data
