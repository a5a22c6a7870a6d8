#include "seqact/data/synthetic.hpp"

#include <algorithm>
#include <string>

#include "seqact/common.hpp"
#include "seqact/data/features.hpp"

namespace seqact::data {

namespace {

void check_spec(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) throw Error("num_classes must be >= 2");
  if (spec.feature_dim < 1) throw Error("feature_dim must be >= 1");
  if (spec.train_videos < 0 || spec.validation_videos < 0 ||
      spec.testing_videos < 0)
    throw Error("video counts must be >= 0");
  if (spec.train_videos + spec.validation_videos + spec.testing_videos < 1)
    throw Error("at least one video is required");
  if (spec.min_clips < 1 || spec.max_clips < spec.min_clips)
    throw Error("need 1 <= min_clips <= max_clips");
  if (spec.min_segments < 1 || spec.max_segments < spec.min_segments)
    throw Error("need 1 <= min_segments <= max_segments");
  if (spec.min_segment_clips < 1) throw Error("min_segment_clips must be >= 1");
  if (spec.min_gap_clips < 0) throw Error("min_gap_clips must be >= 0");
  if (!(spec.class_separation > 0.0))
    throw Error("class_separation must be positive");
  if (spec.noise_sigma < 0.0) throw Error("noise_sigma must be >= 0");
  if (!(spec.fps > 0.0)) throw Error("fps must be positive");
  const long needed =
      static_cast<long>(spec.min_segments) * spec.min_segment_clips +
      static_cast<long>(spec.min_segments - 1) * spec.min_gap_clips;
  if (needed > spec.min_clips)
    throw Error("segment packing infeasible: " +
                std::to_string(spec.min_segments) + " segments of >= " +
                std::to_string(spec.min_segment_clips) + " clips with gaps of >= " +
                std::to_string(spec.min_gap_clips) + " need " +
                std::to_string(needed) + " clips, but videos may have only " +
                std::to_string(spec.min_clips));
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec,
                                    const std::filesystem::path& out_dir) {
  check_spec(spec);
  Rng rng(spec.seed);
  const int K = spec.num_classes;
  const int D = spec.feature_dim;
  const double cd = 16.0 / spec.fps;

  SyntheticDataset dataset;
  dataset.centroids.resize(K + 1, D);
  for (int c = 0; c <= K; ++c) {
    Eigen::VectorXd v(D);
    for (int d = 0; d < D; ++d) v[d] = rng.gaussian();
    double norm = v.norm();
    if (norm < 1e-12) {  // gaussian draws are never all ~0 in practice
      v.setZero();
      v[0] = 1.0;
      norm = 1.0;
    }
    dataset.centroids.row(c) = (spec.class_separation / norm) * v;
  }

  const int name_width =
      static_cast<int>(std::to_string(K).size());
  for (int c = 1; c <= K; ++c)
    dataset.labels.push_back("activity_" + zero_pad(c, name_width));

  const std::pair<Subset, int> plans[] = {
      {Subset::kTrain, spec.train_videos},
      {Subset::kValidation, spec.validation_videos},
      {Subset::kTesting, spec.testing_videos},
  };
  for (const auto& [subset, count] : plans) {
    for (int v = 0; v < count; ++v) {
      const int num_clips =
          static_cast<int>(rng.uniform_int(spec.min_clips, spec.max_clips));
      // Largest segment count whose floors still fit in this video.
      const int max_feasible =
          (num_clips + spec.min_gap_clips) /
          (spec.min_segment_clips + spec.min_gap_clips);
      const int hi = std::min(spec.max_segments, max_feasible);
      const int n =
          static_cast<int>(rng.uniform_int(spec.min_segments, hi));
      const int label = static_cast<int>(rng.uniform_int(1, K));

      // Layout: gap[0] seg[0] gap[1] seg[1] ... seg[n-1] gap[n]; inner gaps
      // keep the floor, boundary gaps may be empty.
      std::vector<int> seg_len(static_cast<std::size_t>(n),
                               spec.min_segment_clips);
      std::vector<int> gap_len(static_cast<std::size_t>(n) + 1, 0);
      for (int j = 1; j < n; ++j)
        gap_len[static_cast<std::size_t>(j)] = spec.min_gap_clips;
      int free_clips = num_clips - n * spec.min_segment_clips -
                       (n - 1) * spec.min_gap_clips;
      for (int u = 0; u < free_clips; ++u) {
        const int slot = static_cast<int>(rng.uniform_int(0, 2 * n));
        if (slot < n)
          ++seg_len[static_cast<std::size_t>(slot)];
        else
          ++gap_len[static_cast<std::size_t>(slot - n)];
      }

      VideoRecord record;
      record.video_id =
          subset_name(subset) + "_" + zero_pad(v, 4);
      record.feature_path = "features/" + record.video_id + ".feat";
      record.fps = spec.fps;
      record.num_clips = num_clips;
      record.subset = subset;

      std::vector<int> clip_labels(static_cast<std::size_t>(num_clips), 0);
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        pos += gap_len[static_cast<std::size_t>(i)];
        const int seg_start = pos;
        pos += seg_len[static_cast<std::size_t>(i)];
        const int seg_end = pos;
        record.annotations.push_back(
            {label, seg_start * cd, seg_end * cd});
        for (int t = seg_start; t < seg_end; ++t)
          clip_labels[static_cast<std::size_t>(t)] = label;
      }

      FeatureSequence features;
      features.video_id = record.video_id;
      features.clips.resize(num_clips, D);
      for (int t = 0; t < num_clips; ++t) {
        const int c = clip_labels[static_cast<std::size_t>(t)];
        for (int d = 0; d < D; ++d)
          features.clips(t, d) = static_cast<float>(
              dataset.centroids(c, d) + spec.noise_sigma * rng.gaussian());
      }
      write_features(features, out_dir / record.feature_path);

      dataset.records.push_back(std::move(record));
      dataset.clip_labels.push_back(std::move(clip_labels));
    }
  }

  dataset.manifest_path = out_dir / "manifest.jsonl";
  dataset.labels_path = out_dir / "labels.txt";
  write_manifest(dataset.records, dataset.manifest_path);
  write_labels(dataset.labels, dataset.labels_path);
  return dataset;
}

}  // namespace seqact::data
