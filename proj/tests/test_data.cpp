#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "seqact/common.hpp"
#include "seqact/data/binio.hpp"
#include "seqact/data/features.hpp"
#include "seqact/data/manifest.hpp"
#include "seqact/data/synthetic.hpp"

using namespace seqact;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("seqact_test_data_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

data::FeatureSequence sample_sequence(int t, int d, std::uint64_t seed) {
  Rng rng(seed);
  data::FeatureSequence seq;
  seq.video_id = "sample";
  seq.clips.resize(t, d);
  for (Eigen::Index i = 0; i < seq.clips.size(); ++i)
    seq.clips.data()[i] = float(rng.uniform(-5, 5));
  return seq;
}

void expect_kind(const fs::path& path, DataError::Kind kind) {
  try {
    data::read_features(path);
    FAIL("expected DataError reading " << path.string());
  } catch (const DataError& e) {
    CHECK(e.kind == kind);
  }
}

}  // namespace

TEST_CASE("feature files roundtrip bit-exactly") {
  auto dir = temp_dir("features");
  auto seq = sample_sequence(7, 5, 1);
  auto path = dir / "sample.feat";
  data::write_features(seq, path);
  auto back = data::read_features(path);
  CHECK(back.video_id == "sample");  // from the file stem
  CHECK(back.clips == seq.clips);

  data::write_features(back, dir / "again.feat");
  CHECK(binio::read_file(path) == binio::read_file(dir / "again.feat"));

  auto named = data::read_features(path, "explicit_name");
  CHECK(named.video_id == "explicit_name");
}

TEST_CASE("feature file layout is frozen") {
  auto dir = temp_dir("layout");
  data::FeatureSequence seq;
  seq.video_id = "v";
  seq.clips.resize(2, 3);
  seq.clips << 1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f;
  auto path = dir / "v.feat";
  data::write_features(seq, path);
  auto bytes = binio::read_file(path);

  REQUIRE(bytes.size() == 16 + 6 * 4);
  CHECK(bytes[0] == 'C');
  CHECK(bytes[1] == '3');
  CHECK(bytes[2] == 'D');
  CHECK(bytes[3] == 'F');
  CHECK(binio::get_u32(bytes.data() + 4) == 1);   // version
  CHECK(binio::get_u32(bytes.data() + 8) == 2);   // T
  CHECK(binio::get_u32(bytes.data() + 12) == 3);  // D
  for (int i = 0; i < 6; ++i)  // row-major payload
    CHECK(binio::get_f32(bytes.data() + 16 + 4 * i) == float(i + 1));
}

TEST_CASE("read_features reports distinct error kinds") {
  auto dir = temp_dir("errors");

  auto write_bytes = [&](const char* name,
                         const std::vector<std::uint8_t>& bytes) {
    auto path = dir / name;
    binio::write_file(path, bytes);
    return path;
  };

  expect_kind(write_bytes("empty.feat", {}), DataError::Kind::kBadMagic);
  expect_kind(write_bytes("magic.feat", {'X', 'X', 'X', 'X'}),
              DataError::Kind::kBadMagic);

  std::vector<std::uint8_t> short_header = {'C', '3', 'D', 'F'};
  binio::put_u32(short_header, 1);
  expect_kind(write_bytes("short.feat", short_header),
              DataError::Kind::kTruncated);

  std::vector<std::uint8_t> bad_version = {'C', '3', 'D', 'F'};
  binio::put_u32(bad_version, 2);
  binio::put_u32(bad_version, 1);
  binio::put_u32(bad_version, 1);
  binio::put_f32(bad_version, 0.0f);
  expect_kind(write_bytes("version.feat", bad_version),
              DataError::Kind::kBadVersion);

  // Header promises T=3, D=2 but only 5 floats follow.
  std::vector<std::uint8_t> trunc = {'C', '3', 'D', 'F'};
  binio::put_u32(trunc, 1);
  binio::put_u32(trunc, 3);
  binio::put_u32(trunc, 2);
  for (int i = 0; i < 5; ++i) binio::put_f32(trunc, 1.0f);
  expect_kind(write_bytes("trunc.feat", trunc), DataError::Kind::kTruncated);

  std::vector<std::uint8_t> zero = {'C', '3', 'D', 'F'};
  binio::put_u32(zero, 1);
  binio::put_u32(zero, 0);
  binio::put_u32(zero, 2);
  expect_kind(write_bytes("zero.feat", zero),
              DataError::Kind::kDimensionMismatch);

  std::vector<std::uint8_t> trailing = {'C', '3', 'D', 'F'};
  binio::put_u32(trailing, 1);
  binio::put_u32(trailing, 1);
  binio::put_u32(trailing, 1);
  binio::put_f32(trailing, 1.0f);
  trailing.push_back(7);
  expect_kind(write_bytes("trailing.feat", trailing),
              DataError::Kind::kDimensionMismatch);

  CHECK_THROWS_AS(data::read_features(dir / "missing.feat"), DataError);
}

TEST_CASE("write_features rejects an empty sequence") {
  data::FeatureSequence empty;
  empty.video_id = "e";
  empty.clips.resize(0, 4);
  CHECK_THROWS_AS(data::write_features(empty, "unused.feat"), ShapeError);
}

TEST_CASE("clip_targets labels whole-video and empty annotations") {
  data::VideoRecord rec;
  rec.video_id = "v";
  rec.feature_path = "v.feat";
  rec.fps = 16.0;  // 1 s clips
  rec.num_clips = 5;
  rec.annotations = {{3, 0.0, 5.0}};
  auto t = data::clip_targets(rec, 4);
  CHECK(t == std::vector<int>({3, 3, 3, 3, 3}));

  rec.annotations.clear();
  CHECK(data::clip_targets(rec, 4) == std::vector<int>(5, 0));
}

TEST_CASE("clip_targets uses the strict half-clip overlap rule") {
  data::VideoRecord rec;
  rec.video_id = "v";
  rec.feature_path = "v.feat";
  rec.fps = 16.0;
  rec.num_clips = 6;
  rec.annotations = {{2, 2.6, 4.0}};
  auto t = data::clip_targets(rec, 3);
  // clip 2 = [2,3): overlap 0.4 <= 0.5 -> background;
  // clip 3 = [3,4): overlap 1.0 -> labeled.
  CHECK(t == std::vector<int>({0, 0, 0, 2, 0, 0}));

  // Exactly half the clip overlapped is still background (strict >).
  rec.annotations = {{2, 2.5, 4.0}};
  auto half = data::clip_targets(rec, 3);
  CHECK(half[2] == 0);
  CHECK(half[3] == 2);
}

TEST_CASE("clip_targets resolves competing annotations by larger overlap") {
  data::VideoRecord rec;
  rec.video_id = "v";
  rec.feature_path = "v.feat";
  rec.fps = 16.0;
  rec.num_clips = 3;
  // Clip 1 = [1,2): first annotation overlaps 0.6, second 0.9.
  rec.annotations = {{1, 0.0, 1.6}, {2, 1.1, 3.0}};
  auto t = data::clip_targets(rec, 2);
  CHECK(t[1] == 2);

  // Equal overlaps tie toward the earlier annotation.
  rec.annotations = {{1, 0.2, 1.8}, {2, 1.2, 2.8}};
  // Clip 1: both overlap 0.8.
  auto tie = data::clip_targets(rec, 2);
  CHECK(tie[1] == 1);
}

TEST_CASE("clip_targets validates the label range and geometry") {
  data::VideoRecord rec;
  rec.video_id = "v";
  rec.feature_path = "v.feat";
  rec.fps = 16.0;
  rec.num_clips = 3;
  rec.annotations = {{5, 0.0, 2.0}};
  CHECK_THROWS_AS(data::clip_targets(rec, 4), Error);

  rec.annotations = {{1, 0.0, 30.0}};  // far beyond the video
  CHECK_THROWS_AS(data::clip_targets(rec, 4), Error);

  rec.annotations = {{1, 0.0, 2.0}};
  auto ok = data::clip_targets(rec, 4);
  CHECK(ok.size() == 3);
}

TEST_CASE("manifest roundtrips and filters by subset") {
  auto dir = temp_dir("manifest");
  std::vector<data::VideoRecord> records;
  for (int i = 0; i < 4; ++i) {
    data::VideoRecord r;
    r.video_id = "vid_" + std::to_string(i);
    r.feature_path = "features/vid_" + std::to_string(i) + ".feat";
    r.fps = 16.0;
    r.num_clips = 10 + i;
    r.subset = i == 2 ? data::Subset::kValidation
                      : (i == 3 ? data::Subset::kTesting : data::Subset::kTrain);
    if (i % 2 == 0) r.annotations.push_back({1 + i % 3, 1.0, 4.5});
    records.push_back(std::move(r));
  }
  auto path = dir / "manifest.jsonl";
  data::write_manifest(records, path);
  auto back = data::read_manifest(path);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].video_id == records[i].video_id);
    CHECK(back[i].feature_path == records[i].feature_path);
    CHECK(back[i].fps == records[i].fps);
    CHECK(back[i].num_clips == records[i].num_clips);
    CHECK(back[i].subset == records[i].subset);
    REQUIRE(back[i].annotations.size() == records[i].annotations.size());
    for (std::size_t a = 0; a < records[i].annotations.size(); ++a) {
      CHECK(back[i].annotations[a].label == records[i].annotations[a].label);
      CHECK(back[i].annotations[a].start_s ==
            records[i].annotations[a].start_s);
      CHECK(back[i].annotations[a].end_s == records[i].annotations[a].end_s);
    }
  }

  auto val = data::split(back, data::Subset::kValidation);
  REQUIRE(val.size() == 1);
  CHECK(val[0].video_id == "vid_2");
  CHECK(data::split(back, data::Subset::kTrain).size() == 2);
  CHECK(data::split(back, data::Subset::kTesting).size() == 1);
}

TEST_CASE("read_manifest accepts an empty file and skips blank lines") {
  auto dir = temp_dir("manifest_empty");
  auto path = dir / "empty.jsonl";
  std::ofstream(path) << "";
  CHECK(data::read_manifest(path).empty());

  auto blanky = dir / "blanks.jsonl";
  std::ofstream(blanky)
      << "\n"
      << R"({"video_id":"a","feature_path":"a.feat","fps":16,"num_clips":4,)"
      << R"("subset":"train","annotations":[]})"
      << "\n\n";
  CHECK(data::read_manifest(blanky).size() == 1);
}

TEST_CASE("read_manifest reports the offending line number") {
  auto dir = temp_dir("manifest_bad");
  auto path = dir / "bad.jsonl";
  std::ofstream(path)
      << R"({"video_id":"a","feature_path":"a.feat","fps":16,"num_clips":4,)"
      << R"("subset":"train","annotations":[]})"
      << "\n"
      << "{not json}\n";
  try {
    data::read_manifest(path);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.kind == DataError::Kind::kMalformed);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  auto unknown = dir / "subset.jsonl";
  std::ofstream(unknown)
      << R"({"video_id":"a","feature_path":"a.feat","fps":16,"num_clips":4,)"
      << R"("subset":"練習","annotations":[]})"
      << "\n";
  try {
    data::read_manifest(unknown);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.kind == DataError::Kind::kMalformed);
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }

  auto bad_geometry = dir / "geometry.jsonl";
  std::ofstream(bad_geometry)
      << R"({"video_id":"a","feature_path":"a.feat","fps":16,"num_clips":4,)"
      << R"("subset":"train","annotations":[{"label":1,"segment":[3.0,1.0]}]})"
      << "\n";
  CHECK_THROWS_AS(data::read_manifest(bad_geometry), DataError);
}

TEST_CASE("parse_subset and subset_name invert each other") {
  for (auto s : {data::Subset::kTrain, data::Subset::kValidation,
                 data::Subset::kTesting})
    CHECK(data::parse_subset(data::subset_name(s)) == s);
  CHECK_THROWS_AS(data::parse_subset("dev"), DataError);
}

TEST_CASE("labels roundtrip and reject empty lines") {
  auto dir = temp_dir("labels");
  std::vector<std::string> labels = {"running", "jumping", "swimming"};
  auto path = dir / "labels.txt";
  data::write_labels(labels, path);
  CHECK(data::read_labels(path) == labels);

  auto bad = dir / "bad.txt";
  std::ofstream(bad) << "running\n\njumping\n";
  CHECK_THROWS_AS(data::read_labels(bad), DataError);

  auto crlf = dir / "crlf.txt";
  std::ofstream(crlf) << "one\r\ntwo\r\n";
  CHECK(data::read_labels(crlf) == std::vector<std::string>({"one", "two"}));
}

TEST_CASE("resolve_feature_path is manifest-relative") {
  data::VideoRecord rec;
  rec.feature_path = "features/v.feat";
  auto resolved = data::resolve_feature_path("/base/manifest.jsonl", rec);
  CHECK(resolved == fs::path("/base/features/v.feat"));

  rec.feature_path = "/abs/v.feat";
  CHECK(data::resolve_feature_path("/base/manifest.jsonl", rec) ==
        fs::path("/abs/v.feat"));
}

TEST_CASE("generate_synthetic with zero noise emits exact centroids") {
  auto dir = temp_dir("synth_zero");
  data::SyntheticSpec spec;
  spec.num_classes = 3;
  spec.feature_dim = 6;
  spec.train_videos = 4;
  spec.validation_videos = 2;
  spec.min_clips = 24;
  spec.max_clips = 30;
  spec.noise_sigma = 0.0;
  spec.seed = 5;
  auto ds = data::generate_synthetic(spec, dir);

  REQUIRE(ds.records.size() == 6);
  REQUIRE(ds.labels.size() == 3);
  REQUIRE(ds.centroids.rows() == 4);
  CHECK(ds.clip_labels.size() == ds.records.size());

  for (std::size_t v = 0; v < ds.records.size(); ++v) {
    const auto& rec = ds.records[v];
    auto feats = data::read_features(
        data::resolve_feature_path(ds.manifest_path, rec), rec.video_id);
    REQUIRE(feats.length() == rec.num_clips);
    REQUIRE(int(ds.clip_labels[v].size()) == rec.num_clips);
    for (int t = 0; t < rec.num_clips; ++t) {
      const int label = ds.clip_labels[v][t];
      for (int d = 0; d < spec.feature_dim; ++d)
        CHECK(feats.clips(t, d) == float(ds.centroids(label, d)));
    }
  }
}

TEST_CASE("generate_synthetic is byte-identical for the same seed") {
  auto a = temp_dir("synth_a");
  auto b = temp_dir("synth_b");
  data::SyntheticSpec spec;
  spec.num_classes = 3;
  spec.feature_dim = 5;
  spec.train_videos = 3;
  spec.validation_videos = 2;
  spec.min_clips = 22;
  spec.max_clips = 40;
  spec.seed = 11;
  auto da = data::generate_synthetic(spec, a);
  auto db = data::generate_synthetic(spec, b);

  CHECK(binio::read_file(da.manifest_path) ==
        binio::read_file(db.manifest_path));
  CHECK(binio::read_file(da.labels_path) == binio::read_file(db.labels_path));
  REQUIRE(da.records.size() == db.records.size());
  for (std::size_t i = 0; i < da.records.size(); ++i) {
    auto fa = data::resolve_feature_path(da.manifest_path, da.records[i]);
    auto fb = data::resolve_feature_path(db.manifest_path, db.records[i]);
    CHECK(binio::read_file(fa) == binio::read_file(fb));
  }

  auto c = temp_dir("synth_c");
  auto different = spec;
  different.seed = 12;
  auto dc = data::generate_synthetic(different, c);
  CHECK(binio::read_file(da.manifest_path) !=
        binio::read_file(dc.manifest_path));
}

TEST_CASE("synthetic ground truth agrees with clip_targets") {
  auto dir = temp_dir("synth_targets");
  data::SyntheticSpec spec;
  spec.num_classes = 5;
  spec.feature_dim = 4;
  spec.train_videos = 70;
  spec.validation_videos = 30;
  spec.min_clips = 25;
  spec.max_clips = 55;
  spec.max_segments = 2;
  spec.seed = 3;
  auto ds = data::generate_synthetic(spec, dir);

  REQUIRE(ds.records.size() == 100);
  for (std::size_t v = 0; v < ds.records.size(); ++v) {
    auto derived = data::clip_targets(ds.records[v], spec.num_classes);
    CHECK(derived == ds.clip_labels[v]);
  }
}

TEST_CASE("synthetic features are nearest-centroid separable at sigma zero") {
  auto dir = temp_dir("synth_sep");
  data::SyntheticSpec spec;
  spec.num_classes = 4;
  spec.feature_dim = 8;
  spec.train_videos = 10;
  spec.validation_videos = 0;
  spec.min_clips = 24;
  spec.max_clips = 32;
  spec.noise_sigma = 0.0;
  spec.class_separation = 2.0;
  spec.seed = 9;
  auto ds = data::generate_synthetic(spec, dir);

  int total = 0, correct = 0;
  for (std::size_t v = 0; v < ds.records.size(); ++v) {
    const auto& rec = ds.records[v];
    auto feats = data::read_features(
        data::resolve_feature_path(ds.manifest_path, rec), rec.video_id);
    for (int t = 0; t < rec.num_clips; ++t) {
      Eigen::VectorXd x = feats.clips.row(t).cast<double>().transpose();
      int best = -1;
      double best_d = 0.0;
      for (int c = 0; c < ds.centroids.rows(); ++c) {
        const double d = (x - ds.centroids.row(c).transpose()).squaredNorm();
        if (best < 0 || d < best_d) {
          best = c;
          best_d = d;
        }
      }
      ++total;
      correct += best == ds.clip_labels[v][t] ? 1 : 0;
    }
  }
  CHECK(total > 0);
  CHECK(correct == total);
}

TEST_CASE("generate_synthetic rejects infeasible packing") {
  auto dir = temp_dir("synth_bad");
  data::SyntheticSpec spec;
  spec.num_classes = 2;
  spec.feature_dim = 4;
  spec.train_videos = 1;
  spec.validation_videos = 0;
  spec.min_clips = 10;   // cannot hold 2 segments of 10 + a 12-clip gap
  spec.max_clips = 12;
  spec.min_segments = 2;
  spec.seed = 1;
  CHECK_THROWS_AS(data::generate_synthetic(spec, dir), Error);

  auto invalid = spec;
  invalid.min_segments = 1;
  invalid.num_classes = 1;  // K >= 2 required
  CHECK_THROWS_AS(data::generate_synthetic(invalid, dir), Error);
}

TEST_CASE("manifest subset counts match the synthetic spec") {
  auto dir = temp_dir("synth_counts");
  data::SyntheticSpec spec;
  spec.num_classes = 2;
  spec.feature_dim = 3;
  spec.train_videos = 5;
  spec.validation_videos = 3;
  spec.testing_videos = 2;
  spec.min_clips = 22;
  spec.max_clips = 26;
  spec.seed = 21;
  auto ds = data::generate_synthetic(spec, dir);
  auto all = data::read_manifest(ds.manifest_path);
  CHECK(data::split(all, data::Subset::kTrain).size() == 5);
  CHECK(data::split(all, data::Subset::kValidation).size() == 3);
  CHECK(data::split(all, data::Subset::kTesting).size() == 2);
  for (const auto& rec : all) {
    CHECK(rec.num_clips >= spec.min_clips);
    CHECK(rec.num_clips <= spec.max_clips);
    CHECK_FALSE(rec.annotations.empty());
    for (const auto& a : rec.annotations) {
      CHECK(a.label >= 1);
      CHECK(a.label <= spec.num_classes);
      CHECK(a.start_s >= 0.0);
      CHECK(a.end_s <= rec.duration_s() + 1e-9);
    }
  }
}
