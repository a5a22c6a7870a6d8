#include "seqact/nn/params.hpp"

#include <cmath>
#include <sstream>

namespace seqact::nn {

namespace {

void check_layer(const LstmLayerParams& layer, Eigen::Index expected_input,
                 int index) {
  Eigen::Index cells = layer.input_weights[0].rows();
  for (int g = 0; g < kGates; ++g) {
    const auto& wi = layer.input_weights[g];
    const auto& wr = layer.recurrent_weights[g];
    const auto& b = layer.biases[g];
    if (wi.rows() != cells || wi.cols() != expected_input ||
        wr.rows() != cells || wr.cols() != cells || b.size() != cells) {
      std::ostringstream msg;
      msg << "lstm layer " << index << " gate " << g
          << ": input weights " << wi.rows() << "x" << wi.cols()
          << ", recurrent " << wr.rows() << "x" << wr.cols() << ", bias "
          << b.size() << "; expected " << cells << "x" << expected_input
          << ", " << cells << "x" << cells << ", " << cells;
      throw ShapeError(msg.str());
    }
  }
}

}  // namespace

void validate(const ModelParams& p) {
  if (p.lstm_layers.empty())
    throw ShapeError("model has no LSTM layers (need at least one)");
  if (p.input_dim < 1) throw ShapeError("input_dim must be positive");
  if (!(p.dropout_p >= 0.0 && p.dropout_p < 1.0))
    throw ShapeError("dropout_p must be in [0, 1)");
  Eigen::Index expected = p.input_dim;
  for (std::size_t l = 0; l < p.lstm_layers.size(); ++l) {
    check_layer(p.lstm_layers[l], expected, static_cast<int>(l));
    expected = p.lstm_layers[l].cells();
  }
  if (p.output.weights.cols() != expected) {
    std::ostringstream msg;
    msg << "dense layer expects input " << p.output.weights.cols()
        << " but last LSTM layer has " << expected << " cells";
    throw ShapeError(msg.str());
  }
  if (p.output.bias.size() != p.output.weights.rows())
    throw ShapeError("dense bias size does not match dense weight rows");
  if (p.output.weights.rows() < 2)
    throw ShapeError("dense layer needs at least 2 outputs (K+1 with K >= 1)");
}

std::vector<std::span<double>> param_spans(ModelParams& p) {
  std::vector<std::span<double>> spans;
  visit_params(p, [&](auto& block) {
    spans.emplace_back(block.data(), static_cast<std::size_t>(block.size()));
  });
  return spans;
}

std::vector<std::span<const double>> param_spans(const ModelParams& p) {
  std::vector<std::span<const double>> spans;
  visit_params(p, [&](const auto& block) {
    spans.emplace_back(block.data(), static_cast<std::size_t>(block.size()));
  });
  return spans;
}

std::size_t param_count(const ModelParams& p) {
  std::size_t n = 0;
  visit_params(p, [&](const auto& block) {
    n += static_cast<std::size_t>(block.size());
  });
  return n;
}

std::vector<double> flatten(const ModelParams& p) {
  std::vector<double> flat;
  flat.reserve(param_count(p));
  for (auto span : param_spans(p)) flat.insert(flat.end(), span.begin(), span.end());
  return flat;
}

void unflatten(ModelParams& p, std::span<const double> values) {
  if (values.size() != param_count(p))
    throw ShapeError("unflatten: scalar count mismatch");
  std::size_t offset = 0;
  for (auto span : param_spans(p)) {
    std::copy(values.begin() + offset, values.begin() + offset + span.size(),
              span.begin());
    offset += span.size();
  }
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams z = p;
  visit_params(z, [](auto& block) { block.setZero(); });
  return z;
}

void add_params(ModelParams& dst, const ModelParams& src) {
  auto d = param_spans(dst);
  auto s = param_spans(src);
  if (d.size() != s.size()) throw ShapeError("add_params: block count mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].size() != s[i].size())
      throw ShapeError("add_params: block size mismatch");
    for (std::size_t j = 0; j < d[i].size(); ++j) d[i][j] += s[i][j];
  }
}

bool all_finite(const ModelParams& p) {
  bool ok = true;
  visit_params(p, [&](const auto& block) { ok = ok && block.allFinite(); });
  return ok;
}

ModelParams init_params(int num_layers, int cells, int num_classes,
                        int input_dim, std::uint64_t seed, double dropout_p) {
  if (num_layers < 1 || cells < 1 || num_classes < 1 || input_dim < 1)
    throw Error("init_params: layer count, cells, classes and input_dim must be positive");
  ModelParams p;
  p.input_dim = input_dim;
  p.dropout_p = dropout_p;
  p.lstm_layers.resize(num_layers);
  Eigen::Index in_dim = input_dim;
  for (auto& layer : p.lstm_layers) {
    for (int g = 0; g < kGates; ++g) {
      layer.input_weights[g].resize(cells, in_dim);
      layer.recurrent_weights[g].resize(cells, cells);
      layer.biases[g] =
          g == kForgetGate ? Eigen::VectorXd::Ones(cells) : Eigen::VectorXd::Zero(cells);
    }
    in_dim = cells;
  }
  p.output.weights.resize(num_classes + 1, cells);
  p.output.bias = Eigen::VectorXd::Zero(num_classes + 1);

  Rng rng(seed);
  auto fill_uniform = [&](Eigen::MatrixXd& m) {
    double s = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    // Column-major traversal: fixed draw order for a fixed shape.
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-s, s);
  };
  for (auto& layer : p.lstm_layers) {
    for (auto& m : layer.input_weights) fill_uniform(m);
    for (auto& m : layer.recurrent_weights) fill_uniform(m);
  }
  fill_uniform(p.output.weights);
  validate(p);
  return p;
}

}  // namespace seqact::nn
