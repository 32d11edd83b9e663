#include "qsan/encoder.hpp"

#include "qsan/errors.hpp"
#include "qsan/ops.hpp"
#include "qsan/softmax.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

namespace qsan {

Eigen::VectorXcd WordState::ket() const {
  Eigen::VectorXcd k(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) k(j) = std::polar(amplitude(j), phase(j));
  return k;
}

WordState word_to_state(const RVec& amplitude, const RVec& phase) {
  if (amplitude.size() != phase.size() || amplitude.size() == 0) {
    throw ShapeError("word_to_state: amplitude size " + std::to_string(amplitude.size()) +
                     " vs phase size " + std::to_string(phase.size()));
  }
  const auto d = amplitude.size();
  WordState w{RVec(d), RVec(d)};
  const double norm = amplitude.norm();
  for (Eigen::Index j = 0; j < d; ++j) {
    double r = norm < 1e-12 ? 1.0 / std::sqrt(static_cast<double>(d)) : amplitude(j) / norm;
    double phi = phase(j);
    if (r < 0.0) {
      r = -r;
      phi += std::numbers::pi;
    }
    w.amplitude(j) = r;
    w.phase(j) = std::remainder(phi, 2.0 * std::numbers::pi);
  }
  return w;
}

PolarComponents superpose(const WordState& w1, const WordState& w2) {
  if (w1.dim() != w2.dim()) {
    throw ShapeError("superpose: dimension " + std::to_string(w1.dim()) + " vs " +
                     std::to_string(w2.dim()));
  }
  const auto d = w1.dim();
  PolarComponents out{RVec(d), RVec(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    const double r1 = w1.amplitude(j), r2 = w2.amplitude(j);
    const double p1 = w1.phase(j), p2 = w2.phase(j);
    const double y = r1 * std::sin(p1) + r2 * std::sin(p2);
    const double x = r1 * std::cos(p1) + r2 * std::cos(p2);
    if (x == 0.0 && y == 0.0) {
      out.amplitude(j) = 0.0;
      out.phase(j) = 0.0;
      continue;
    }
    const double sq = r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * std::cos(p1 - p2);
    out.amplitude(j) = std::sqrt(std::max(sq, 0.0));
    out.phase(j) = std::atan2(y, x);
  }
  return out;
}

GruWeights GruWeights::zeros(Eigen::Index d) {
  return GruWeights{RMat::Zero(d, 3 * d), RMat::Zero(d, 3 * d), RMat::Zero(1, 3 * d),
                    RMat::Zero(1, 3 * d)};
}

GruWeights GruWeights::random(Eigen::Index d, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    RMat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
  };
  GruWeights w;
  w.wx = fill(d, 3 * d);
  w.wh = fill(d, 3 * d);
  w.bx = fill(1, 3 * d);
  w.bh = fill(1, 3 * d);
  return w;
}

namespace {

graph_encoder::GruVars constants(Graph& g, const GruWeights& w) {
  return {g.constant(CMat(w.wx)), g.constant(CMat(w.wh)), g.constant(CMat(w.bx)),
          g.constant(CMat(w.bh))};
}

}  // namespace

std::vector<WordState> contextualize(const std::vector<WordState>& states, const GruParams& params,
                                     size_t max_tokens) {
  if (states.empty()) throw std::invalid_argument("contextualize: empty sequence");
  size_t m = states.size();
  if (m > max_tokens) {
    spdlog::warn("contextualize: truncating sequence of {} tokens to {}", m, max_tokens);
    m = max_tokens;
  }
  const Eigen::Index d = states.front().dim();
  RMat amp(static_cast<Eigen::Index>(m), d), phase(static_cast<Eigen::Index>(m), d);
  for (size_t i = 0; i < m; ++i) {
    if (states[i].dim() != d) throw ShapeError("contextualize: mixed word dimensions");
    amp.row(static_cast<Eigen::Index>(i)) = states[i].amplitude.transpose();
    phase.row(static_cast<Eigen::Index>(i)) = states[i].phase.transpose();
  }

  Graph g;
  const auto ga = constants(g, params.amplitude);
  const auto gp = constants(g, params.phase);
  const RMat ha = ops::gru(g.constant(CMat(amp)), ga.wx, ga.wh, ga.bx, ga.bh).value().re;
  const RMat hp = ops::gru(g.constant(CMat(phase)), gp.wx, gp.wh, gp.bx, gp.bh).value().re;

  std::vector<WordState> out;
  out.reserve(m);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
    out.push_back(word_to_state(ha.row(i).transpose(), hp.row(i).transpose()));
  }
  return out;
}

DensityMatrix mixture(const std::vector<WordState>& states, const RVec& logits) {
  if (states.empty()) throw std::invalid_argument("mixture: no words");
  if (static_cast<size_t>(logits.size()) != states.size()) {
    throw ShapeError("mixture: " + std::to_string(states.size()) + " words but " +
                     std::to_string(logits.size()) + " logits");
  }
  const Eigen::Index d = states.front().dim();
  CMat kets = CMat::zeros(static_cast<Eigen::Index>(states.size()), d);
  for (size_t i = 0; i < states.size(); ++i) {
    if (states[i].dim() != d) throw ShapeError("mixture: mixed word dimensions");
    const Eigen::VectorXcd k = states[i].ket();
    kets.re.row(static_cast<Eigen::Index>(i)) = k.real().transpose();
    kets.im.row(static_cast<Eigen::Index>(i)) = k.imag().transpose();
  }
  Graph g;
  Var rho = graph_encoder::mixture(g.constant(kets), g.constant(CMat(RMat(logits.transpose()))));
  return DensityMatrix{rho.value(), MatrixKind::proper};
}

namespace graph_encoder {

Var contextual_amplitudes(Var amplitudes, const GruVars& gru) {
  return ops::normalize_rows(ops::gru(amplitudes, gru.wx, gru.wh, gru.bx, gru.bh));
}

Var contextual_phases(Var phases, const GruVars& gru) {
  return ops::gru(phases, gru.wx, gru.wh, gru.bx, gru.bh);
}

Var kets(Var amplitudes, Var phases) { return ops::polar(amplitudes, phases); }

Var mixture(Var kets, Var logits_row) {
  const Eigen::Index m = kets.value().rows();
  if (logits_row.value().cols() < m) {
    throw ShapeError("mixture: " + std::to_string(m) + " words exceed " +
                     std::to_string(logits_row.value().cols()) + " mixture logits");
  }
  Var probs = ops::real_part(ops::csoftmax(ops::slice_cols(logits_row, 0, m), Channel::pos));
  return ops::mixture(kets, probs);
}

}  // namespace graph_encoder

}  // namespace qsan
