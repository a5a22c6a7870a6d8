#include "seqact/nn/model.hpp"

#include <cmath>
#include <sstream>

namespace seqact::nn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Scaled inverted-dropout mask: 0 with probability p, else 1/(1-p).
Eigen::VectorXd dropout_mask(Eigen::Index n, double p, Rng& rng) {
  if (p <= 0.0) return Eigen::VectorXd::Ones(n);
  double scale = 1.0 / (1.0 - p);
  Eigen::VectorXd mask(n);
  for (Eigen::Index i = 0; i < n; ++i)
    mask[i] = rng.uniform() < p ? 0.0 : scale;
  return mask;
}

}  // namespace

LstmState zero_state(Eigen::Index cells) {
  return {Eigen::VectorXd::Zero(cells), Eigen::VectorXd::Zero(cells)};
}

std::pair<LstmState, LstmStepCache> lstm_cell_step(const LstmLayerParams& layer,
                                                   const Eigen::VectorXd& x,
                                                   const LstmState& state) {
  Eigen::Index cells = layer.cells();
  if (x.size() != layer.input_dim()) {
    std::ostringstream msg;
    msg << "lstm_cell_step: input has " << x.size()
        << " entries but the layer expects " << layer.input_dim();
    throw ShapeError(msg.str());
  }
  if (state.hidden.size() != cells || state.cell.size() != cells) {
    std::ostringstream msg;
    msg << "lstm_cell_step: state is " << state.hidden.size() << "/"
        << state.cell.size() << " but the layer has " << cells << " cells";
    throw ShapeError(msg.str());
  }

  LstmStepCache cache;
  cache.input = x;
  cache.prev_hidden = state.hidden;
  cache.prev_cell = state.cell;
  for (int g = 0; g < kGates; ++g) {
    Eigen::VectorXd pre = layer.input_weights[g] * x +
                          layer.recurrent_weights[g] * state.hidden +
                          layer.biases[g];
    if (g == kCandidateGate)
      cache.gates[g] = pre.array().tanh().matrix();
    else
      cache.gates[g] = pre.unaryExpr([](double z) { return sigmoid(z); });
  }
  cache.cell = cache.gates[kForgetGate].cwiseProduct(state.cell) +
               cache.gates[kInputGate].cwiseProduct(cache.gates[kCandidateGate]);
  cache.cell_tanh = cache.cell.array().tanh().matrix();
  cache.hidden = cache.gates[kOutputGate].cwiseProduct(cache.cell_tanh);

  LstmState next{cache.hidden, cache.cell};
  return {std::move(next), std::move(cache)};
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  double m = logits.maxCoeff();
  Eigen::ArrayXd shifted = logits.array() - m;
  double lse = std::log(shifted.exp().sum());
  return (shifted - lse).matrix();
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  return log_softmax(logits).array().exp().matrix();
}

ForwardResult model_forward(const ModelParams& params,
                            const Eigen::MatrixXd& features, RunMode mode,
                            std::uint64_t rng_seed) {
  validate(params);
  Eigen::Index T = features.rows();
  if (T < 1) throw Error("model_forward: empty feature sequence");
  if (features.cols() != params.input_dim) {
    std::ostringstream msg;
    msg << "model_forward: features have dimension " << features.cols()
        << " but the model expects " << params.input_dim;
    throw ShapeError(msg.str());
  }

  Eigen::Index layers = params.num_layers();
  Eigen::Index last_cells = params.cells();
  Eigen::Index outputs = params.output.outputs();

  ForwardTrace trace;
  trace.train_mode = mode == RunMode::kTrain;
  if (trace.train_mode) {
    Rng rng(rng_seed);
    trace.input_mask = dropout_mask(params.input_dim, params.dropout_p, rng);
    trace.output_mask = dropout_mask(last_cells, params.dropout_p, rng);
  } else {
    trace.input_mask = Eigen::VectorXd::Ones(params.input_dim);
    trace.output_mask = Eigen::VectorXd::Ones(last_cells);
  }

  trace.steps.resize(layers);
  std::vector<Eigen::VectorXd> layer_in(T);
  for (Eigen::Index t = 0; t < T; ++t)
    layer_in[t] = features.row(t).transpose().cwiseProduct(trace.input_mask);

  for (Eigen::Index l = 0; l < layers; ++l) {
    const auto& layer = params.lstm_layers[l];
    LstmState state = zero_state(layer.cells());
    trace.steps[l].reserve(T);
    for (Eigen::Index t = 0; t < T; ++t) {
      auto [next, cache] = lstm_cell_step(layer, layer_in[t], state);
      state = std::move(next);
      layer_in[t] = state.hidden;
      trace.steps[l].push_back(std::move(cache));
    }
  }

  trace.dropped_output.resize(T, last_cells);
  trace.logits.resize(T, outputs);
  trace.log_probs.resize(T, outputs);
  trace.probs.resize(T, outputs);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd dropped = layer_in[t].cwiseProduct(trace.output_mask);
    Eigen::VectorXd z = params.output.weights * dropped + params.output.bias;
    Eigen::VectorXd logp = log_softmax(z);
    trace.dropped_output.row(t) = dropped.transpose();
    trace.logits.row(t) = z.transpose();
    trace.log_probs.row(t) = logp.transpose();
    trace.probs.row(t) = logp.array().exp().transpose();
  }

  return {trace.probs, std::move(trace)};
}

ModelParams model_backward(const ModelParams& params, const ForwardTrace& trace,
                           const Eigen::MatrixXd& logit_grads) {
  validate(params);
  Eigen::Index layers = params.num_layers();
  if (static_cast<Eigen::Index>(trace.steps.size()) != layers)
    throw ShapeError("model_backward: trace layer count does not match model");
  Eigen::Index T = trace.length();
  if (T < 1) throw Error("model_backward: trace is empty");
  for (const auto& layer_steps : trace.steps)
    if (static_cast<Eigen::Index>(layer_steps.size()) != T)
      throw Error("model_backward: trace is inconsistent across layers");
  if (logit_grads.rows() != T || logit_grads.cols() != params.output.outputs()) {
    std::ostringstream msg;
    msg << "model_backward: logit gradients are " << logit_grads.rows() << "x"
        << logit_grads.cols() << " but the trace holds " << T << "x"
        << params.output.outputs();
    throw ShapeError(msg.str());
  }

  ModelParams grads = zeros_like(params);

  // Dense layer, then back through the output dropout mask.
  std::vector<Eigen::VectorXd> grad_hidden(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Eigen::VectorXd dz = logit_grads.row(t).transpose();
    grads.output.weights.noalias() += dz * trace.dropped_output.row(t);
    grads.output.bias += dz;
    grad_hidden[t] = (params.output.weights.transpose() * dz)
                         .cwiseProduct(trace.output_mask);
  }

  // BPTT through the LSTM stack, top layer first.
  for (Eigen::Index l = layers - 1; l >= 0; --l) {
    const auto& layer = params.lstm_layers[l];
    auto& glayer = grads.lstm_layers[l];
    Eigen::Index cells = layer.cells();
    Eigen::VectorXd dh_rec = Eigen::VectorXd::Zero(cells);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(cells);
    std::vector<Eigen::VectorXd> grad_input(T);

    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const LstmStepCache& s = trace.steps[l][t];
      const auto& gi = s.gates[kInputGate];
      const auto& gf = s.gates[kForgetGate];
      const auto& go = s.gates[kOutputGate];
      const auto& gg = s.gates[kCandidateGate];

      Eigen::VectorXd dh = grad_hidden[t] + dh_rec;
      Eigen::ArrayXd dc = dc_next.array() +
                          dh.array() * go.array() * (1.0 - s.cell_tanh.array().square());

      Eigen::VectorXd do_pre =
          (dh.array() * s.cell_tanh.array() * go.array() * (1.0 - go.array()))
              .matrix();
      Eigen::VectorXd di_pre =
          (dc * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
      Eigen::VectorXd df_pre =
          (dc * s.prev_cell.array() * gf.array() * (1.0 - gf.array())).matrix();
      Eigen::VectorXd dg_pre = (dc * gi.array() * (1.0 - gg.array().square())).matrix();

      const std::array<const Eigen::VectorXd*, kGates> dpre = {
          &di_pre, &df_pre, &do_pre, &dg_pre};
      Eigen::VectorXd dx = Eigen::VectorXd::Zero(layer.input_dim());
      dh_rec.setZero();
      for (int g = 0; g < kGates; ++g) {
        glayer.input_weights[g].noalias() += *dpre[g] * s.input.transpose();
        glayer.recurrent_weights[g].noalias() += *dpre[g] * s.prev_hidden.transpose();
        glayer.biases[g] += *dpre[g];
        dx.noalias() += layer.input_weights[g].transpose() * *dpre[g];
        dh_rec.noalias() += layer.recurrent_weights[g].transpose() * *dpre[g];
      }
      dc_next = (dc * gf.array()).matrix();
      grad_input[t] = std::move(dx);
    }
    grad_hidden = std::move(grad_input);  // feeds the layer below
  }
  // grad_hidden now holds gradients w.r.t. the dropped input features; the raw
  // feature gradient is not a model parameter and is not reported.

  return grads;
}

}  // namespace seqact::nn
