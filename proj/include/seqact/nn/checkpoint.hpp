// Model checkpoint persistence.
//
// Layout: magic "SAC1"; header of four u32 little-endian values
// [num_layers, cells, num_classes, input_dim]; then every parameter as f32
// little-endian in visit_params order (per layer: input weights i,f,o,g
// row-major, recurrent weights i,f,o,g row-major, biases i,f,o,g; then dense
// weights row-major, dense bias). Requires a uniform cell count across layers.
#pragma once

#include <filesystem>

#include "seqact/nn/params.hpp"

namespace seqact::nn {

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path);

// dropout_p is not stored; loaded models carry the default 0.5.
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace seqact::nn
