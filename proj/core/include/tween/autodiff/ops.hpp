#pragma once

#include "tween/autodiff/tape.hpp"

#include <span>
#include <vector>

namespace tween::ad {

enum class Activation { Identity, Elu, Plu, Tanh, Sigmoid, Softmax };

// PLU slope and knee.
inline constexpr double kPluAlpha = 0.1;
inline constexpr double kPluC = 1.0;

double elu(double x);
double plu(double x);

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// x (B x n) plus a row vector (1 x n) broadcast over rows.
Var add_row(Var x, Var row);
/// x (B x n) times a column (B x 1) broadcast over columns.
Var mul_col(Var x, Var col);
Var scale(Var x, double s);
Var add_scalar(Var x, double s);

Var concat_cols(std::span<const Var> parts);
Var concat_cols(std::initializer_list<Var> parts);
Var slice_cols(Var x, Index start, Index count);

Var activate(Activation kind, Var x);
Var elu(Var x);
Var plu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
/// Row-wise softmax.
Var softmax(Var x);
Var exp(Var x);
Var square(Var x);
Var abs(Var x);

/// Euclidean norm of consecutive 3-column groups: (B x 3k) -> (B x k).
/// `eps` is added under the square root so the gradient exists at zero.
inline constexpr double kNormEps = 1e-12;
Var norm3(Var x, double eps = kNormEps);

Var sum(Var x);
Var mean(Var x);

struct LstmState {
  Var h;
  Var c;
};

/// One LSTM step. `wx` is (in x 4H), `wh` is (H x 4H), `b` is (1 x 4H), gate
/// blocks ordered input, forget, candidate, output.
LstmState lstm_cell(Var x, const LstmState& state, Var wx, Var wh, Var b);

}  // namespace tween::ad
