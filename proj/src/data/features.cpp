#include "seqact/data/features.hpp"

#include <string>
#include <vector>

#include "seqact/common.hpp"
#include "seqact/data/binio.hpp"

namespace seqact::data {

namespace {
constexpr char kMagic[4] = {'C', '3', 'D', 'F'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 16;  // magic + version + T + D
}  // namespace

void write_features(const FeatureSequence& seq,
                    const std::filesystem::path& path) {
  if (seq.clips.rows() < 1 || seq.clips.cols() < 1)
    throw ShapeError("feature sequence '" + seq.video_id + "' is empty");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(kHeaderBytes +
                static_cast<std::size_t>(seq.clips.size()) * 4);
  for (char c : kMagic) bytes.push_back(static_cast<std::uint8_t>(c));
  binio::put_u32(bytes, kVersion);
  binio::put_u32(bytes, static_cast<std::uint32_t>(seq.clips.rows()));
  binio::put_u32(bytes, static_cast<std::uint32_t>(seq.clips.cols()));
  for (Eigen::Index t = 0; t < seq.clips.rows(); ++t)
    for (Eigen::Index d = 0; d < seq.clips.cols(); ++d)
      binio::put_f32(bytes, seq.clips(t, d));
  binio::write_file(path, bytes);
}

FeatureSequence read_features(const std::filesystem::path& path,
                              const std::string& video_id) {
  const auto bytes = binio::read_file(path);
  if (bytes.size() < 4 ||
      !std::equal(kMagic, kMagic + 4, bytes.begin(),
                  [](char c, std::uint8_t b) {
                    return static_cast<std::uint8_t>(c) == b;
                  }))
    throw DataError(DataError::Kind::kBadMagic,
                    path.string() + ": not a feature file (bad magic)");
  if (bytes.size() < kHeaderBytes)
    throw DataError(DataError::Kind::kTruncated,
                    path.string() + ": header truncated");
  const std::uint32_t version = binio::get_u32(bytes.data() + 4);
  if (version != kVersion)
    throw DataError(DataError::Kind::kBadVersion,
                    path.string() + ": unsupported version " +
                        std::to_string(version));
  const std::uint32_t T = binio::get_u32(bytes.data() + 8);
  const std::uint32_t D = binio::get_u32(bytes.data() + 12);
  if (T == 0 || D == 0)
    throw DataError(DataError::Kind::kDimensionMismatch,
                    path.string() + ": zero dimension in header (T=" +
                        std::to_string(T) + ", D=" + std::to_string(D) + ")");
  const std::size_t expected =
      kHeaderBytes + static_cast<std::size_t>(T) * D * 4;
  if (bytes.size() < expected)
    throw DataError(DataError::Kind::kTruncated,
                    path.string() + ": payload truncated (" +
                        std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(expected) + ")");
  if (bytes.size() > expected)
    throw DataError(DataError::Kind::kDimensionMismatch,
                    path.string() + ": " +
                        std::to_string(bytes.size() - expected) +
                        " trailing bytes after payload");

  FeatureSequence seq;
  seq.video_id = video_id.empty() ? path.stem().string() : video_id;
  seq.clips.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(D));
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (Eigen::Index t = 0; t < seq.clips.rows(); ++t)
    for (Eigen::Index d = 0; d < seq.clips.cols(); ++d, p += 4)
      seq.clips(t, d) = binio::get_f32(p);
  return seq;
}

}  // namespace seqact::data
