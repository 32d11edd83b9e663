#pragma once

#include "qsan/graph.hpp"
#include "qsan/softmax.hpp"

#include <vector>

// Differentiable operations recorded on a Graph. Gradients follow the
// convention G = dL/d(re) + i dL/d(im); for a holomorphic map y = f(x) this
// gives G_x = conj(f'(x)) G_y, and per-plane maps are handled plane by plane.
namespace qsan::ops {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
Var matmul(Var a, Var b);
// Elementwise complex product.
Var hadamard(Var a, Var b);
Var transpose(Var a);
Var adjoint(Var a);
Var conj(Var a);
Var ctanh(Var a);
// Drops the imaginary plane.
Var real_part(Var a);
// Sum of all entries, 1x1.
Var sum(Var a);
// Row-wise csoftmax.
Var csoftmax(Var a, Channel channel);

// r e^{i phi} entrywise, reading the real planes of both inputs.
Var polar(Var amplitude, Var phase);
// Scales each row of the real plane to unit L2 norm; an all-zero row maps to
// the uniform row 1/sqrt(cols) and passes no gradient.
Var normalize_rows(Var a);
// Scales each complex row to unit norm. Throws if a row norm is below 1e-12.
Var normalize_rows_complex(Var a);

// Rows of `table` selected by `ids`. A negative id -j-1 selects row j of the
// constant `extras` matrix instead (no gradient).
Var gather_rows(Var table, std::vector<int> ids, const RMat& extras = RMat());
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var hconcat(const std::vector<Var>& parts);
Var vconcat(const std::vector<Var>& parts);
// Row-major vectorization of a matrix into 1 x (rows*cols); with `transposed`
// the matrix is transposed first.
Var flatten(Var a, bool transposed = false);
// Row-major inverse of flatten.
Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);

// Mixture density matrix sum_i p_i |w_i><w_i| where |w_i> is row i of
// `states` (m x d complex) and p is the real plane of `probs` (1 x m).
Var mixture(Var states, Var probs);
// out_z = sum_b a[z,b] * b[z,b] (no conjugation), Z x 1.
Var rowwise_dot(Var a, Var b);
// Softmax cross-entropy of a 1 x C real logit row against class `target`.
Var softmax_xent(Var logits, int target);

// Real-valued GRU over the rows of x (real plane), zero initial state.
// Gate blocks in the weight columns are ordered [reset | update | candidate]:
//   r = s(x wx_r + bx_r + h wh_r + bh_r)
//   z = s(x wx_z + bx_z + h wh_z + bh_z)
//   n = tanh(x wx_n + bx_n + r * (h wh_n + bh_n))
//   h' = (1 - z) * n + z * h
// Returns all hidden states, m x hidden.
Var gru(Var x, Var wx, Var wh, Var bx, Var bh);

}  // namespace qsan::ops
