#pragma once

// Differentiable operations over Graph nodes. Image-like tensors are H×W×C,
// conv kernels k×k×Cin×Cout, linear weights D×O (out[o] = Σ_d in[d]·W[d,o] + b[o]).

#include <cstdint>
#include <string>

#include "stnet/graph.hpp"

namespace stnet {

enum class PoolMode { Average, Max };

Var conv2d(Graph& g, Var input, Var kernel, Var bias, std::size_t stride, std::size_t padding);
Var maxpool2x2(Graph& g, Var input);
Var upsample2x(Graph& g, Var input);
/// Per-pixel mean or max over channels: H×W×C -> H×W×1.
Var channel_pool(Graph& g, Var input, PoolMode mode);
/// H×W×Ca ++ H×W×Cb -> H×W×(Ca+Cb).
Var concat_channels(Graph& g, Var a, Var b);
/// Broadcasts a length-D vector to every pixel: D -> H×W×D.
Var tile_spatial(Graph& g, Var vec, std::size_t height, std::size_t width);
/// map (H×W×1) times features (H×W×C), broadcast over channels.
Var scale_by_map(Graph& g, Var map, Var features);

Var linear(Graph& g, Var input, Var weight, Var bias);
Var concat(Graph& g, Var a, Var b);
Var reshape(Graph& g, Var x, Shape shape);

Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);
Var tanh(Graph& g, Var x);
/// Inverted dropout. The mask is a pure function of (seed, call_index).
/// Throws ParameterError unless 0 <= p < 1.
Var dropout(Graph& g, Var x, double p, bool train, std::uint64_t seed, std::uint64_t call_index);

Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var scale(Graph& g, Var x, double factor);
/// Σ x² (scalar).
Var sum_squares(Graph& g, Var x);

/// Mean of squared elementwise differences (scalar).
Var mse(Graph& g, Var pred, Var target);
/// Σ (a-b)² (scalar).
Var squared_distance(Graph& g, Var a, Var b);
/// Whole-image SSIM per channel (1/N moments), averaged over channels (scalar).
Var ssim(Graph& g, Var pred, Var target, double c1, double c2);

/// Parameter handles for one LSTM layer. Gate weights are (Hd + D)×Hd acting on [h_prev, q].
struct LstmCellParams {
  Var w_f, w_i, w_o, w_c;
  Var b_f, b_i, b_o, b_c;
};

struct LstmState {
  Var h;
  Var c;
};

LstmCellParams bind_lstm_params(Graph& g, ParamStore& store, const std::string& prefix);

/// f,i,o = sigmoid(W·[h,q]+b); c̃ = tanh(W_c·[h,q]+b_c); c = f⊙c_prev + i⊙c̃; h = o⊙tanh(c).
LstmState lstm_cell(Graph& g, Var q, const LstmState& prev, const LstmCellParams& p);

}  // namespace stnet
