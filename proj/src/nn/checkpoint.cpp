#include "seqact/nn/checkpoint.hpp"

#include <sstream>

#include "seqact/data/binio.hpp"

namespace seqact::nn {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'C', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 * 4;

// Row-major scalar walk over one parameter block.
template <typename Block, typename F>
void walk_row_major(Block& block, F&& f) {
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < block.cols(); ++c) f(block(r, c));
}

}  // namespace

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path) {
  validate(params);
  Eigen::Index cells = params.lstm_layers.front().cells();
  for (const auto& layer : params.lstm_layers)
    if (layer.cells() != cells)
      throw Error("save_checkpoint: the format requires a uniform cell count "
                  "across LSTM layers");

  std::vector<std::uint8_t> bytes;
  bytes.reserve(kHeaderBytes + param_count(params) * 4);
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  binio::put_u32(bytes, static_cast<std::uint32_t>(params.num_layers()));
  binio::put_u32(bytes, static_cast<std::uint32_t>(cells));
  binio::put_u32(bytes, static_cast<std::uint32_t>(params.num_classes()));
  binio::put_u32(bytes, static_cast<std::uint32_t>(params.input_dim));
  visit_params(params, [&](const auto& block) {
    walk_row_major(block, [&](double v) {
      binio::put_f32(bytes, static_cast<float>(v));
    });
  });
  binio::write_file(path, bytes);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  auto bytes = binio::read_file(path);
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin()))
    throw DataError(DataError::Kind::kBadMagic,
                    path.string() + ": not a checkpoint file (bad magic)");
  if (bytes.size() < kHeaderBytes)
    throw DataError(DataError::Kind::kTruncated,
                    path.string() + ": checkpoint header is truncated");
  std::uint32_t layers = binio::get_u32(bytes.data() + 4);
  std::uint32_t cells = binio::get_u32(bytes.data() + 8);
  std::uint32_t classes = binio::get_u32(bytes.data() + 12);
  std::uint32_t input_dim = binio::get_u32(bytes.data() + 16);
  if (layers < 1 || cells < 1 || classes < 1 || input_dim < 1)
    throw DataError(DataError::Kind::kDimensionMismatch,
                    path.string() + ": checkpoint header has zero dimensions");

  ModelParams params;
  params.input_dim = static_cast<Eigen::Index>(input_dim);
  params.lstm_layers.resize(layers);
  Eigen::Index in_dim = params.input_dim;
  for (auto& layer : params.lstm_layers) {
    for (int g = 0; g < kGates; ++g) {
      layer.input_weights[g].resize(cells, in_dim);
      layer.recurrent_weights[g].resize(cells, cells);
      layer.biases[g].resize(cells);
    }
    in_dim = cells;
  }
  params.output.weights.resize(classes + 1, cells);
  params.output.bias.resize(classes + 1);

  std::size_t expected = kHeaderBytes + param_count(params) * 4;
  if (bytes.size() < expected) {
    std::ostringstream msg;
    msg << path.string() << ": checkpoint payload is truncated (got "
        << bytes.size() << " bytes, header promises " << expected << ")";
    throw DataError(DataError::Kind::kTruncated, msg.str());
  }
  if (bytes.size() > expected) {
    std::ostringstream msg;
    msg << path.string() << ": checkpoint has " << bytes.size() - expected
        << " trailing bytes beyond the " << expected << " the header promises";
    throw DataError(DataError::Kind::kDimensionMismatch, msg.str());
  }

  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  visit_params(params, [&](auto& block) {
    walk_row_major(block, [&](double& v) {
      v = static_cast<double>(binio::get_f32(p));
      p += 4;
    });
  });
  validate(params);
  return params;
}

}  // namespace seqact::nn
