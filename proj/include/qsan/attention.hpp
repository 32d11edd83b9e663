#pragma once

#include "qsan/encoder.hpp"
#include "qsan/graph.hpp"
#include "qsan/softmax.hpp"

#include <optional>
#include <random>
#include <vector>

namespace qsan {

enum class AttentionMode { signed_attention, co_attention };

// Projection tensors W^s, W^c (d x d x k) are stored as d^2 x k matrices whose
// row a*d + b holds W[a, b, :]. The four heads are 1 x k rows.
struct AttentionParams {
  CMat w_s;
  CMat w_c;
  CMat s_pos;
  CMat s_neg;
  CMat c_pos;
  CMat c_neg;

  static AttentionParams random(Eigen::Index d, Eigen::Index k, std::mt19937_64& rng);
};

struct AttentionBundle {
  RMat affinity;   // M, N x T
  RMat squashed;   // L = tanh(M)
  CMat h_s;        // N x k
  CMat h_c;        // T x k
  CMat a_s_pos, a_s_neg;  // 1 x N
  CMat a_c_pos, a_c_neg;  // 1 x T
  // Pre-softmax rows W h^T for every channel.
  CMat raw_s_pos, raw_s_neg;
  CMat raw_c_pos, raw_c_neg;
  bool has_negative = true;
};

struct SignedWeights {
  CMat a_pos, a_neg, raw_pos, raw_neg;
};

struct AttentionResult {
  DensityMatrix s_pos;
  DensityMatrix c_pos;
  std::optional<DensityMatrix> s_neg;
  std::optional<DensityMatrix> c_neg;
  AttentionBundle bundle;
};

// M_ij = Re tr(rho^s_i rho^c_j), L = tanh(M). Throws if an imaginary residue
// exceeds 1e-8.
std::pair<RMat, RMat> affinity(const std::vector<DensityMatrix>& sentences,
                               const std::vector<DensityMatrix>& comments);

// H^s = ctanh(rho^s W^s + L (rho^c W^c)), H^c = ctanh(rho^c W^c + L^T (rho^s W^s)).
std::pair<CMat, CMat> attention_maps(const std::vector<DensityMatrix>& sentences,
                                     const std::vector<DensityMatrix>& comments, const RMat& l,
                                     const AttentionParams& params);

SignedWeights signed_weights(const CMat& h, const CMat& w_pos, const CMat& w_neg);

// sum_i a_i rho_i; the result is a feature matrix, not a state.
DensityMatrix feature_matrices(const CMat& weights, const std::vector<DensityMatrix>& rhos);

AttentionResult run_attention(const std::vector<DensityMatrix>& sentences,
                              const std::vector<DensityMatrix>& comments,
                              const AttentionParams& params,
                              AttentionMode mode = AttentionMode::signed_attention);

namespace graph_attention {

// Stacked, row-vectorized density matrices of one side. `flat` row i is
// vec(rho_i); `flat_t` row i is vec(rho_i^T).
struct Stack {
  Var flat;
  Var flat_t;
  Eigen::Index dim = 0;
};

Stack stack(const std::vector<Var>& rhos);

struct Heads {
  Var w_s, w_c, s_pos, s_neg, c_pos, c_neg;
};

struct Output {
  Var m, l, h_s, h_c;
  Var raw_s_pos, raw_s_neg, raw_c_pos, raw_c_neg;
  Var a_s_pos, a_s_neg, a_c_pos, a_c_neg;
  // Feature matrices, d x d.
  Var s_pos, s_neg, c_pos, c_neg;
  bool has_negative = true;

  AttentionBundle bundle() const;
};

Var affinity(const Stack& sentences, const Stack& comments);
Output run(const Stack& sentences, const Stack& comments, const Heads& heads, AttentionMode mode);

}  // namespace graph_attention

}  // namespace qsan
