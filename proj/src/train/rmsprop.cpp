#include "seqact/train/rmsprop.hpp"

#include <cmath>
#include <string>

#include "seqact/common.hpp"

namespace seqact::train {

OptimizerState make_optimizer_state(const nn::ModelParams& params,
                                    double learning_rate, double decay,
                                    double epsilon) {
  if (!(learning_rate >= 0.0))
    throw Error("learning_rate must be non-negative");
  if (!(decay > 0.0) || !(decay < 1.0))
    throw Error("decay must lie in (0, 1), got " + std::to_string(decay));
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  OptimizerState state;
  state.learning_rate = learning_rate;
  state.decay = decay;
  state.epsilon = epsilon;
  state.mean_square = nn::zeros_like(params);
  return state;
}

void rmsprop_step(nn::ModelParams& params, const nn::ModelParams& grads,
                  OptimizerState& state) {
  if (!nn::all_finite(grads)) throw NumericError("gradient is not finite");
  auto p_spans = nn::param_spans(params);
  auto g_spans = nn::param_spans(grads);
  auto m_spans = nn::param_spans(state.mean_square);
  if (p_spans.size() != g_spans.size() || p_spans.size() != m_spans.size())
    throw ShapeError("optimizer state does not match parameter shapes");
  for (std::size_t i = 0; i < p_spans.size(); ++i) {
    auto p = p_spans[i];
    auto g = g_spans[i];
    auto m = m_spans[i];
    if (p.size() != g.size() || p.size() != m.size())
      throw ShapeError("optimizer state does not match parameter shapes");
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = state.decay * m[j] + (1.0 - state.decay) * g[j] * g[j];
      p[j] -= state.learning_rate * g[j] / (std::sqrt(m[j]) + state.epsilon);
    }
  }
  if (!nn::all_finite(params))
    throw NumericError("parameters diverged during update");
  if (!nn::all_finite(state.mean_square))
    throw NumericError("optimizer state diverged during update");
}

}  // namespace seqact::train
