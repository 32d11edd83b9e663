#include "qsan/attention.hpp"

#include "qsan/errors.hpp"
#include "qsan/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace qsan {

namespace {

CMat uniform_cmat(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  CMat m = CMat::zeros(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.re.data()[i] = dist(rng);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.im.data()[i] = dist(rng);
  return m;
}

std::vector<Var> constants(Graph& g, const std::vector<DensityMatrix>& rhos) {
  if (rhos.empty()) throw std::invalid_argument("attention: empty density matrix list");
  std::vector<Var> out;
  out.reserve(rhos.size());
  const Eigen::Index d = rhos.front().dim();
  for (const auto& r : rhos) {
    if (r.mat.rows() != d || r.mat.cols() != d) {
      throw ShapeError("attention: density matrix " + r.mat.shape_string() + ", expected " +
                       shape_string(d, d));
    }
    out.push_back(g.constant(r.mat));
  }
  return out;
}

graph_attention::Heads constants(Graph& g, const AttentionParams& p) {
  return {g.constant(p.w_s),   g.constant(p.w_c),   g.constant(p.s_pos),
          g.constant(p.s_neg), g.constant(p.c_pos), g.constant(p.c_neg)};
}

void check_same_dim(const graph_attention::Stack& s, const graph_attention::Stack& c) {
  if (s.dim != c.dim) {
    throw ShapeError("attention: sentence dimension " + std::to_string(s.dim) +
                     " vs comment dimension " + std::to_string(c.dim));
  }
}

}  // namespace

AttentionParams AttentionParams::random(Eigen::Index d, Eigen::Index k, std::mt19937_64& rng) {
  AttentionParams p;
  p.w_s = uniform_cmat(d * d, k, rng);
  p.w_c = uniform_cmat(d * d, k, rng);
  p.s_pos = uniform_cmat(1, k, rng);
  p.s_neg = uniform_cmat(1, k, rng);
  p.c_pos = uniform_cmat(1, k, rng);
  p.c_neg = uniform_cmat(1, k, rng);
  return p;
}

std::pair<RMat, RMat> affinity(const std::vector<DensityMatrix>& sentences,
                               const std::vector<DensityMatrix>& comments) {
  Graph g;
  const auto s = graph_attention::stack(constants(g, sentences));
  const auto c = graph_attention::stack(constants(g, comments));
  Var m = graph_attention::affinity(s, c);
  RMat mv = m.value().re;
  RMat lv = mv.array().tanh().matrix();
  return {std::move(mv), std::move(lv)};
}

std::pair<CMat, CMat> attention_maps(const std::vector<DensityMatrix>& sentences,
                                     const std::vector<DensityMatrix>& comments, const RMat& l,
                                     const AttentionParams& params) {
  Graph g;
  const auto s = graph_attention::stack(constants(g, sentences));
  const auto c = graph_attention::stack(constants(g, comments));
  check_same_dim(s, c);
  const Eigen::Index n = static_cast<Eigen::Index>(sentences.size());
  const Eigen::Index t = static_cast<Eigen::Index>(comments.size());
  if (l.rows() != n || l.cols() != t) {
    throw ShapeError("attention_maps: L is " + shape_string(l.rows(), l.cols()) + ", expected " +
                     shape_string(n, t));
  }
  const auto heads = constants(g, params);
  Var lv = g.constant(CMat(l));
  Var ps = ops::matmul(s.flat, heads.w_s);
  Var pc = ops::matmul(c.flat, heads.w_c);
  Var hs = ops::ctanh(ops::add(ps, ops::matmul(lv, pc)));
  Var hc = ops::ctanh(ops::add(pc, ops::matmul(ops::transpose(lv), ps)));
  return {hs.value(), hc.value()};
}

SignedWeights signed_weights(const CMat& h, const CMat& w_pos, const CMat& w_neg) {
  if (h.rows() < 1) throw std::invalid_argument("signed_weights: no rows");
  if (w_pos.rows() != 1 || w_pos.cols() != h.cols() || w_neg.rows() != 1 ||
      w_neg.cols() != h.cols()) {
    throw ShapeError("signed_weights: heads " + w_pos.shape_string() + "/" +
                     w_neg.shape_string() + " do not match H " + h.shape_string());
  }
  SignedWeights out;
  out.raw_pos = cmul(w_pos, transpose(h));
  out.raw_neg = cmul(w_neg, transpose(h));
  out.a_pos = csoftmax(out.raw_pos, Channel::pos);
  out.a_neg = csoftmax(out.raw_neg, Channel::neg);
  return out;
}

DensityMatrix feature_matrices(const CMat& weights, const std::vector<DensityMatrix>& rhos) {
  if (weights.rows() != 1 || static_cast<size_t>(weights.cols()) != rhos.size()) {
    throw ShapeError("feature_matrices: weights " + weights.shape_string() + " for " +
                     std::to_string(rhos.size()) + " matrices");
  }
  Graph g;
  const auto s = graph_attention::stack(constants(g, rhos));
  Var flat = ops::matmul(g.constant(weights), s.flat);
  return DensityMatrix{ops::reshape(flat, s.dim, s.dim).value(), MatrixKind::feature};
}

AttentionResult run_attention(const std::vector<DensityMatrix>& sentences,
                              const std::vector<DensityMatrix>& comments,
                              const AttentionParams& params, AttentionMode mode) {
  Graph g;
  const auto s = graph_attention::stack(constants(g, sentences));
  const auto c = graph_attention::stack(constants(g, comments));
  const auto out = graph_attention::run(s, c, constants(g, params), mode);
  AttentionResult r;
  r.s_pos = DensityMatrix{out.s_pos.value(), MatrixKind::feature};
  r.c_pos = DensityMatrix{out.c_pos.value(), MatrixKind::feature};
  if (out.has_negative) {
    r.s_neg = DensityMatrix{out.s_neg.value(), MatrixKind::feature};
    r.c_neg = DensityMatrix{out.c_neg.value(), MatrixKind::feature};
  }
  r.bundle = out.bundle();
  return r;
}

namespace graph_attention {

Stack stack(const std::vector<Var>& rhos) {
  if (rhos.empty()) throw std::invalid_argument("attention: empty density matrix list");
  const Eigen::Index d = rhos.front().value().rows();
  std::vector<Var> flat, flat_t;
  flat.reserve(rhos.size());
  flat_t.reserve(rhos.size());
  for (const Var& r : rhos) {
    if (r.value().rows() != d || r.value().cols() != d) {
      throw ShapeError("attention: density matrix " + r.value().shape_string() +
                       ", expected " + shape_string(d, d));
    }
    flat.push_back(ops::flatten(r));
    flat_t.push_back(ops::flatten(r, true));
  }
  return Stack{ops::vconcat(flat), ops::vconcat(flat_t), d};
}

Var affinity(const Stack& sentences, const Stack& comments) {
  check_same_dim(sentences, comments);
  // tr(A B) = sum_ab A[a,b] B[b,a] = vec(A) . vec(B^T)
  Var full = ops::matmul(sentences.flat, ops::transpose(comments.flat_t));
  const double residue = full.value().im.cwiseAbs().maxCoeff();
  if (residue >= 1e-8) {
    throw std::domain_error("affinity: imaginary residue " + std::to_string(residue) +
                            " exceeds 1e-8; inputs are not Hermitian");
  }
  return ops::real_part(full);
}

Output run(const Stack& sentences, const Stack& comments, const Heads& heads, AttentionMode mode) {
  Output o;
  o.has_negative = mode == AttentionMode::signed_attention;
  const Eigen::Index d2 = sentences.dim * sentences.dim;
  if (heads.w_s.value().rows() != d2 || heads.w_c.value().rows() != d2) {
    throw ShapeError("attention: projection " + heads.w_s.value().shape_string() +
                     " does not match d^2 = " + std::to_string(d2));
  }
  o.m = affinity(sentences, comments);
  o.l = ops::real_part(ops::ctanh(o.m));

  Var ps = ops::matmul(sentences.flat, heads.w_s);
  Var pc = ops::matmul(comments.flat, heads.w_c);
  o.h_s = ops::ctanh(ops::add(ps, ops::matmul(o.l, pc)));
  o.h_c = ops::ctanh(ops::add(pc, ops::matmul(ops::transpose(o.l), ps)));

  const Eigen::Index d = sentences.dim;
  auto feature = [d](Var weights, const Stack& side) {
    return ops::reshape(ops::matmul(weights, side.flat), d, d);
  };

  o.raw_s_pos = ops::matmul(heads.s_pos, ops::transpose(o.h_s));
  o.raw_c_pos = ops::matmul(heads.c_pos, ops::transpose(o.h_c));
  o.a_s_pos = ops::csoftmax(o.raw_s_pos, Channel::pos);
  o.a_c_pos = ops::csoftmax(o.raw_c_pos, Channel::pos);
  o.s_pos = feature(o.a_s_pos, sentences);
  o.c_pos = feature(o.a_c_pos, comments);
  if (o.has_negative) {
    o.raw_s_neg = ops::matmul(heads.s_neg, ops::transpose(o.h_s));
    o.raw_c_neg = ops::matmul(heads.c_neg, ops::transpose(o.h_c));
    o.a_s_neg = ops::csoftmax(o.raw_s_neg, Channel::neg);
    o.a_c_neg = ops::csoftmax(o.raw_c_neg, Channel::neg);
    o.s_neg = feature(o.a_s_neg, sentences);
    o.c_neg = feature(o.a_c_neg, comments);
  }
  return o;
}

AttentionBundle Output::bundle() const {
  AttentionBundle b;
  b.affinity = m.value().re;
  b.squashed = l.value().re;
  b.h_s = h_s.value();
  b.h_c = h_c.value();
  b.raw_s_pos = raw_s_pos.value();
  b.raw_c_pos = raw_c_pos.value();
  b.a_s_pos = a_s_pos.value();
  b.a_c_pos = a_c_pos.value();
  b.has_negative = has_negative;
  if (has_negative) {
    b.raw_s_neg = raw_s_neg.value();
    b.raw_c_neg = raw_c_neg.value();
    b.a_s_neg = a_s_neg.value();
    b.a_c_neg = a_c_neg.value();
  }
  return b;
}

}  // namespace graph_attention

}  // namespace qsan
