#pragma once

#include "qsan/cmat.hpp"
#include "qsan/graph.hpp"

#include <random>
#include <vector>

namespace qsan {

// A word as a superposition over d basis states: amplitudes r_j >= 0 with
// sum r_j^2 = 1 and phases phi_j in [-pi, pi].
struct WordState {
  RVec amplitude;
  RVec phase;

  Eigen::Index dim() const { return amplitude.size(); }
  // [r_j e^{i phi_j}]
  Eigen::VectorXcd ket() const;
};

// Normalizes amplitudes (an all-zero vector becomes uniform 1/sqrt(d)) and
// wraps phases into [-pi, pi]. A negative amplitude is folded into the phase
// (r e^{i phi} = |r| e^{i (phi + pi)}), so the ket is unchanged.
WordState word_to_state(const RVec& amplitude, const RVec& phase);

// Per-dimension polar result of adding two word kets.
struct PolarComponents {
  RVec amplitude;
  RVec phase;
};

// Interference composition of two words, computed in polar form:
//   r_j   = sqrt(r1^2 + r2^2 + 2 r1 r2 cos(phi1 - phi2))
//   phi_j = atan2(r1 sin phi1 + r2 sin phi2, r1 cos phi1 + r2 cos phi2)
PolarComponents superpose(const WordState& w1, const WordState& w2);

// Weights of one real GRU with hidden size equal to its input size.
struct GruWeights {
  RMat wx;  // d x 3d, column blocks [reset | update | candidate]
  RMat wh;  // d x 3d
  RMat bx;  // 1 x 3d
  RMat bh;  // 1 x 3d

  static GruWeights zeros(Eigen::Index d);
  static GruWeights random(Eigen::Index d, std::mt19937_64& rng);
};

// One GRU over amplitude vectors and an independent one over phase vectors.
struct GruParams {
  GruWeights amplitude;
  GruWeights phase;
};

// Runs the amplitude and phase streams through their GRUs and re-normalizes
// each output with word_to_state. Sequences longer than max_tokens are
// truncated with a warning.
std::vector<WordState> contextualize(const std::vector<WordState>& states, const GruParams& params,
                                     size_t max_tokens = 32);

enum class MatrixKind { proper, feature };

struct DensityMatrix {
  CMat mat;
  MatrixKind kind = MatrixKind::proper;

  Eigen::Index dim() const { return mat.rows(); }
};

// rho = sum_i softmax(logits)_i |w_i><w_i|.
DensityMatrix mixture(const std::vector<WordState>& states, const RVec& logits);

// Graph-level pieces shared with the model.
namespace graph_encoder {

struct GruVars {
  Var wx, wh, bx, bh;
};

// Amplitude rows (m x d, real) through the GRU and row normalization.
Var contextual_amplitudes(Var amplitudes, const GruVars& gru);
// Phase rows through the phase GRU.
Var contextual_phases(Var phases, const GruVars& gru);
// Word kets (m x d complex) from amplitude and phase rows.
Var kets(Var amplitudes, Var phases);
// Mixture density matrix from kets and the first m entries of a logit row.
Var mixture(Var kets, Var logits_row);

}  // namespace graph_encoder

}  // namespace qsan
