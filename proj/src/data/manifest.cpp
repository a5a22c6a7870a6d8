#include "seqact/data/manifest.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

#include "seqact/common.hpp"

namespace seqact::data {

using nlohmann::json;

Subset parse_subset(const std::string& name) {
  if (name == "train") return Subset::kTrain;
  if (name == "validation") return Subset::kValidation;
  if (name == "testing") return Subset::kTesting;
  throw DataError(DataError::Kind::kMalformed,
                  "unknown subset '" + name +
                      "' (expected train, validation or testing)");
}

std::string subset_name(Subset subset) {
  switch (subset) {
    case Subset::kTrain: return "train";
    case Subset::kValidation: return "validation";
    case Subset::kTesting: return "testing";
  }
  throw Error("invalid subset value");
}

namespace {

void check_record(const VideoRecord& r) {
  if (r.video_id.empty())
    throw DataError(DataError::Kind::kMalformed, "video_id is empty");
  if (r.feature_path.empty())
    throw DataError(DataError::Kind::kMalformed,
                    "video '" + r.video_id + "': feature_path is empty");
  if (!(r.fps > 0.0))
    throw DataError(DataError::Kind::kMalformed,
                    "video '" + r.video_id + "': fps must be positive");
  if (r.num_clips < 1)
    throw DataError(DataError::Kind::kMalformed,
                    "video '" + r.video_id + "': num_clips must be >= 1");
  // Annotations may overrun the clip grid by at most one clip (timestamps
  // from annotation tools rarely land exactly on the last clip boundary).
  const double limit = r.duration_s() + r.clip_duration_s();
  for (const auto& a : r.annotations) {
    if (a.label < 1)
      throw DataError(DataError::Kind::kMalformed,
                      "video '" + r.video_id + "': annotation label " +
                          std::to_string(a.label) + " must be >= 1");
    if (!(a.end_s > a.start_s))
      throw DataError(DataError::Kind::kMalformed,
                      "video '" + r.video_id + "': degenerate segment [" +
                          std::to_string(a.start_s) + ", " +
                          std::to_string(a.end_s) + ")");
    if (a.start_s < 0.0 || a.end_s > limit)
      throw DataError(DataError::Kind::kMalformed,
                      "video '" + r.video_id + "': segment [" +
                          std::to_string(a.start_s) + ", " +
                          std::to_string(a.end_s) +
                          ") outside the video span [0, " +
                          std::to_string(limit) + ")");
  }
}

VideoRecord record_from_json(const json& j) {
  if (!j.is_object())
    throw DataError(DataError::Kind::kMalformed, "line is not a JSON object");
  VideoRecord r;
  try {
    r.video_id = j.at("video_id").get<std::string>();
    r.feature_path = j.at("feature_path").get<std::string>();
    r.fps = j.at("fps").get<double>();
    r.num_clips = j.at("num_clips").get<int>();
    r.subset = parse_subset(j.at("subset").get<std::string>());
    for (const auto& a : j.at("annotations")) {
      AnnotationSpan span;
      span.label = a.at("label").get<int>();
      const auto& seg = a.at("segment");
      if (!seg.is_array() || seg.size() != 2)
        throw DataError(DataError::Kind::kMalformed,
                        "segment must be [start_s, end_s]");
      span.start_s = seg[0].get<double>();
      span.end_s = seg[1].get<double>();
      r.annotations.push_back(span);
    }
  } catch (const json::exception& e) {
    throw DataError(DataError::Kind::kMalformed, e.what());
  }
  check_record(r);
  return r;
}

json record_to_json(const VideoRecord& r) {
  json annotations = json::array();
  for (const auto& a : r.annotations)
    annotations.push_back(
        {{"label", a.label}, {"segment", {a.start_s, a.end_s}}});
  return json{{"video_id", r.video_id},
              {"feature_path", r.feature_path},
              {"fps", r.fps},
              {"num_clips", r.num_clips},
              {"subset", subset_name(r.subset)},
              {"annotations", annotations}};
}

}  // namespace

std::vector<VideoRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  std::vector<VideoRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DataError(DataError::Kind::kMalformed,
                      path.string() + ":" + std::to_string(line_no) + ": " +
                          e.what());
    } catch (const DataError& e) {
      throw DataError(e.kind, path.string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
    }
  }
  if (in.bad())
    throw DataError(DataError::Kind::kIo, "read failed on " + path.string());
  return records;
}

void write_manifest(const std::vector<VideoRecord>& records,
                    const std::filesystem::path& path) {
  for (const auto& r : records) check_record(r);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw DataError(DataError::Kind::kIo, "cannot create " + path.string());
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
  if (!out)
    throw DataError(DataError::Kind::kIo, "write failed on " + path.string());
}

std::vector<VideoRecord> split(const std::vector<VideoRecord>& records,
                               Subset subset) {
  std::vector<VideoRecord> out;
  for (const auto& r : records)
    if (r.subset == subset) out.push_back(r);
  return out;
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw DataError(DataError::Kind::kIo, "cannot open " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      throw DataError(DataError::Kind::kMalformed,
                      path.string() + ":" +
                          std::to_string(labels.size() + 1) +
                          ": empty class name");
    labels.push_back(line);
  }
  if (in.bad())
    throw DataError(DataError::Kind::kIo, "read failed on " + path.string());
  return labels;
}

void write_labels(const std::vector<std::string>& labels,
                  const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw DataError(DataError::Kind::kIo, "cannot create " + path.string());
  for (const auto& label : labels) out << label << '\n';
  if (!out)
    throw DataError(DataError::Kind::kIo, "write failed on " + path.string());
}

std::filesystem::path resolve_feature_path(
    const std::filesystem::path& manifest_path, const VideoRecord& record) {
  std::filesystem::path p(record.feature_path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

std::vector<int> clip_targets(const VideoRecord& record, int num_classes) {
  check_record(record);
  if (num_classes < 1) throw Error("num_classes must be >= 1");
  for (const auto& a : record.annotations)
    if (a.label > num_classes)
      throw Error("video '" + record.video_id + "': annotation label " +
                  std::to_string(a.label) + " exceeds " +
                  std::to_string(num_classes) + " classes");

  const double cd = record.clip_duration_s();
  std::vector<int> targets(static_cast<std::size_t>(record.num_clips), 0);
  for (int i = 0; i < record.num_clips; ++i) {
    const double clip_start = i * cd;
    const double clip_end = clip_start + cd;
    double best_overlap = cd / 2.0;  // strictly more than half the clip
    for (const auto& a : record.annotations) {
      const double overlap = std::min(a.end_s, clip_end) -
                             std::max(a.start_s, clip_start);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        targets[static_cast<std::size_t>(i)] = a.label;
      }
    }
  }
  return targets;
}

}  // namespace seqact::data
