#include "helpers.hpp"

#include "qsan/attention.hpp"
#include "qsan/errors.hpp"
#include "qsan/gradcheck.hpp"
#include "qsan/params.hpp"

#include <doctest.h>

#include <cmath>

using namespace qsan;
using namespace qsan::test;
using cd = std::complex<double>;

namespace {

std::vector<DensityMatrix> random_rhos(size_t n, Eigen::Index d, std::mt19937_64& rng) {
  std::vector<DensityMatrix> out;
  std::uniform_int_distribution<int> words(1, 6);
  for (size_t i = 0; i < n; ++i) out.push_back(random_rho(d, static_cast<size_t>(words(rng)), rng));
  return out;
}

// (rho W)[i, k] = sum_{a,b} rho_i[a, b] W[a, b, k], explicit loops.
ZMat project_oracle(const std::vector<DensityMatrix>& rhos, const CMat& w) {
  const Eigen::Index d = rhos.front().dim();
  const ZMat wz = w.to_complex();
  ZMat out = ZMat::Zero(static_cast<Eigen::Index>(rhos.size()), w.cols());
  for (size_t i = 0; i < rhos.size(); ++i) {
    const ZMat r = rhos[i].mat.to_complex();
    for (Eigen::Index k = 0; k < w.cols(); ++k) {
      for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
          out(static_cast<Eigen::Index>(i), k) += r(a, b) * wz(a * d + b, k);
        }
      }
    }
  }
  return out;
}

cd tanh_parts(cd z) { return {std::tanh(z.real()), std::tanh(z.imag())}; }

// Straight-line script of the full attention block with std::complex.
struct ScriptedBundle {
  RMat m;
  ZMat hs, hc, raw_s_pos, raw_s_neg, raw_c_pos, raw_c_neg, a_s_pos, a_s_neg, a_c_pos, a_c_neg;
  ZMat s_pos, s_neg, c_pos, c_neg;
};

ZMat part_softmax(const ZMat& raw, double sign) {
  ZMat out(raw.rows(), raw.cols());
  double zr = 0.0, zi = 0.0;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    zr += std::exp(sign * raw(0, j).real());
    zi += std::exp(sign * raw(0, j).imag());
  }
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    out(0, j) = cd(sign * std::exp(sign * raw(0, j).real()) / zr,
                   sign * std::exp(sign * raw(0, j).imag()) / zi);
  }
  return out;
}

ScriptedBundle script(const std::vector<DensityMatrix>& s, const std::vector<DensityMatrix>& c,
                      const AttentionParams& p) {
  ScriptedBundle o;
  const auto n = static_cast<Eigen::Index>(s.size()), t = static_cast<Eigen::Index>(c.size());
  const Eigen::Index d = s.front().dim();
  o.m = RMat(n, t);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < t; ++j) {
      const ZMat a = s[static_cast<size_t>(i)].mat.to_complex();
      const ZMat b = c[static_cast<size_t>(j)].mat.to_complex();
      cd tr = 0.0;
      for (Eigen::Index x = 0; x < d; ++x) {
        for (Eigen::Index y = 0; y < d; ++y) tr += a(x, y) * b(y, x);
      }
      o.m(i, j) = tr.real();
    }
  }
  const ZMat ps = project_oracle(s, p.w_s), pc = project_oracle(c, p.w_c);
  const Eigen::Index k = p.w_s.cols();
  o.hs = ZMat(n, k);
  o.hc = ZMat(t, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index kk = 0; kk < k; ++kk) {
      cd acc = ps(i, kk);
      for (Eigen::Index j = 0; j < t; ++j) acc += std::tanh(o.m(i, j)) * pc(j, kk);
      o.hs(i, kk) = tanh_parts(acc);
    }
  }
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index kk = 0; kk < k; ++kk) {
      cd acc = pc(j, kk);
      for (Eigen::Index i = 0; i < n; ++i) acc += std::tanh(o.m(i, j)) * ps(i, kk);
      o.hc(j, kk) = tanh_parts(acc);
    }
  }
  auto raw = [&](const CMat& head, const ZMat& h) {
    ZMat out = ZMat::Zero(1, h.rows());
    const ZMat w = head.to_complex();
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      for (Eigen::Index kk = 0; kk < h.cols(); ++kk) out(0, i) += w(0, kk) * h(i, kk);
    }
    return out;
  };
  auto feature = [&](const ZMat& a, const std::vector<DensityMatrix>& rhos) {
    ZMat out = ZMat::Zero(d, d);
    for (size_t i = 0; i < rhos.size(); ++i) {
      out += a(0, static_cast<Eigen::Index>(i)) * rhos[i].mat.to_complex();
    }
    return out;
  };
  o.raw_s_pos = raw(p.s_pos, o.hs);
  o.raw_s_neg = raw(p.s_neg, o.hs);
  o.raw_c_pos = raw(p.c_pos, o.hc);
  o.raw_c_neg = raw(p.c_neg, o.hc);
  o.a_s_pos = part_softmax(o.raw_s_pos, 1.0);
  o.a_s_neg = part_softmax(o.raw_s_neg, -1.0);
  o.a_c_pos = part_softmax(o.raw_c_pos, 1.0);
  o.a_c_neg = part_softmax(o.raw_c_neg, -1.0);
  o.s_pos = feature(o.a_s_pos, s);
  o.s_neg = feature(o.a_s_neg, s);
  o.c_pos = feature(o.a_c_pos, c);
  o.c_neg = feature(o.a_c_neg, c);
  return o;
}

DensityMatrix basis_state(Eigen::Index d, Eigen::Index j) {
  RVec r = RVec::Zero(d);
  r(j) = 1.0;
  return mixture({word_to_state(r, RVec::Zero(d))}, RVec::Zero(1));
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("affinity of pure states") {
  const auto e1 = basis_state(3, 0), e2 = basis_state(3, 1);
  auto [m, l] = affinity({e1}, {e1});
  CHECK(m(0, 0) == doctest::Approx(1.0));
  CHECK(l(0, 0) == doctest::Approx(0.76159).epsilon(1e-5));
  auto [m2, l2] = affinity({e1}, {e2});
  CHECK(m2(0, 0) == 0.0);
  CHECK(l2(0, 0) == 0.0);
}

TEST_CASE("affinity matches the trace oracle, is bounded and role-symmetric") {
  std::mt19937_64 rng(31);
  for (int s = 0; s < 30; ++s) {
    const Eigen::Index d = 2 + s % 5;
    const auto a = random_rhos(3, d, rng), b = random_rhos(4, d, rng);
    const auto [m, l] = affinity(a, b);
    const auto [mt, lt] = affinity(b, a);
    CHECK((mt - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 4; ++j) {
        const cd tr = (a[static_cast<size_t>(i)].mat.to_complex() * b[static_cast<size_t>(j)].mat.to_complex()).trace();
        CHECK(std::abs(tr.imag()) < 1e-10);
        CHECK(std::abs(m(i, j) - tr.real()) < 1e-12);
        CHECK(m(i, j) >= -1e-10);
        CHECK(m(i, j) <= 1.0 + 1e-9);
        CHECK(l(i, j) == doctest::Approx(std::tanh(m(i, j))));
      }
    }
  }
}

TEST_CASE("affinity refuses non-Hermitian inputs") {
  std::mt19937_64 rng(32);
  DensityMatrix bad{random_cmat(3, 3, rng), MatrixKind::feature};
  DensityMatrix other{random_cmat(3, 3, rng), MatrixKind::feature};
  CHECK_THROWS_AS(affinity({bad}, {other}), std::domain_error);
  CHECK_THROWS_AS(affinity({basis_state(3, 0)}, {basis_state(4, 0)}), ShapeError);
}

TEST_CASE("attention maps: zero weights, decoupled case and loop oracle") {
  std::mt19937_64 rng(33);
  const Eigen::Index d = 3, k = 2;
  const auto s = random_rhos(2, d, rng), c = random_rhos(3, d, rng);
  AttentionParams p = AttentionParams::random(d, k, rng);

  AttentionParams zero = p;
  zero.w_s = CMat::zeros(d * d, k);
  zero.w_c = CMat::zeros(d * d, k);
  const auto [m, l] = affinity(s, c);
  auto [hs0, hc0] = attention_maps(s, c, l, zero);
  CHECK(max_abs(hs0.to_complex()) == 0.0);
  CHECK(max_abs(hc0.to_complex()) == 0.0);

  auto [hs_dec, hc_dec] = attention_maps(s, c, RMat::Zero(2, 3), p);
  const ZMat ps = project_oracle(s, p.w_s);
  for (Eigen::Index i = 0; i < ps.rows(); ++i) {
    for (Eigen::Index kk = 0; kk < k; ++kk) {
      CHECK(std::abs(hs_dec.to_complex()(i, kk) - tanh_parts(ps(i, kk))) < 1e-12);
    }
  }

  for (int t = 0; t < 10; ++t) {
    const auto s2 = random_rhos(1 + t % 3, d, rng), c2 = random_rhos(1 + t % 4, d, rng);
    const AttentionParams q = AttentionParams::random(d, k, rng);
    const auto [m2, l2] = affinity(s2, c2);
    auto [hs, hc] = attention_maps(s2, c2, l2, q);
    const auto o = script(s2, c2, q);
    CHECK(hs.rows() == static_cast<Eigen::Index>(s2.size()));
    CHECK(hc.rows() == static_cast<Eigen::Index>(c2.size()));
    CHECK(hs.cols() == k);
    CHECK(max_abs(hs.to_complex() - o.hs) < 1e-10);
    CHECK(max_abs(hc.to_complex() - o.hc) < 1e-10);
  }
}

TEST_CASE("signed weights") {
  std::mt19937_64 rng(34);
  const CMat h1 = random_cmat(1, 3, rng);
  const SignedWeights one = signed_weights(h1, random_cmat(1, 3, rng), random_cmat(1, 3, rng));
  CHECK(one.a_pos.re(0, 0) == 1.0);
  CHECK(one.a_pos.im(0, 0) == 1.0);
  CHECK(one.a_neg.re(0, 0) == -1.0);
  CHECK(one.a_neg.im(0, 0) == -1.0);

  // H = identity rows picks the raw values straight from the head.
  CMat w(RMat::Zero(1, 4));
  w.re << 0.8, 0.2, -0.1, -0.6;
  const SignedWeights ex = signed_weights(CMat(RMat::Identity(4, 4)), w, w);
  const double expected[] = {0.45, 0.25, 0.18, 0.11};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(ex.a_pos.re(0, i) - expected[i]) <= 0.005);
    CHECK(ex.a_pos.im(0, i) == doctest::Approx(0.25));
  }

  for (int t = 0; t < 30; ++t) {
    const CMat h = random_cmat(5, 3, rng);
    const SignedWeights sw = signed_weights(h, random_cmat(1, 3, rng), random_cmat(1, 3, rng));
    CHECK(std::abs(sw.a_pos.re.sum() - 1.0) < 1e-9);
    CHECK(std::abs(sw.a_pos.im.sum() - 1.0) < 1e-9);
    CHECK(std::abs(sw.a_neg.re.sum() + 1.0) < 1e-9);
    CHECK(std::abs(sw.a_neg.im.sum() + 1.0) < 1e-9);
    Eigen::Index top_raw, top_w, low_raw, low_w;
    sw.raw_pos.re.row(0).maxCoeff(&top_raw);
    sw.a_pos.re.row(0).maxCoeff(&top_w);
    sw.raw_neg.im.row(0).minCoeff(&low_raw);
    sw.a_neg.im.row(0).minCoeff(&low_w);
    CHECK(top_raw == top_w);
    CHECK(low_raw == low_w);
  }
}

TEST_CASE("feature matrices") {
  std::mt19937_64 rng(35);
  const auto rhos = random_rhos(3, 3, rng);
  CMat one(RMat::Ones(1, 1), RMat::Ones(1, 1));
  const DensityMatrix f1 = feature_matrices(one, {rhos[0]});
  CHECK(f1.kind == MatrixKind::feature);
  CHECK(max_abs(f1.mat.to_complex() - cd(1.0, 1.0) * rhos[0].mat.to_complex()) < 1e-15);

  const DensityMatrix mean = feature_matrices(CMat(RMat::Constant(1, 3, 1.0 / 3.0)), rhos);
  const ZMat expected =
      (rhos[0].mat.to_complex() + rhos[1].mat.to_complex() + rhos[2].mat.to_complex()) / 3.0;
  CHECK(max_abs(mean.mat.to_complex() - expected) < 1e-15);

  const CMat a = random_cmat(1, 3, rng);
  ZMat sum = ZMat::Zero(3, 3);
  for (int i = 0; i < 3; ++i) sum += a.to_complex()(0, i) * rhos[static_cast<size_t>(i)].mat.to_complex();
  CHECK(max_abs(feature_matrices(a, rhos).mat.to_complex() - sum) < 1e-12);
}

TEST_CASE("run_attention matches the scripted oracle on the N=2, T=3 fixture") {
  std::mt19937_64 rng(36);
  const auto s = random_rhos(2, 4, rng), c = random_rhos(3, 4, rng);
  const AttentionParams p = AttentionParams::random(4, 3, rng);
  const AttentionResult r = run_attention(s, c, p);
  const auto o = script(s, c, p);
  const auto& b = r.bundle;
  CHECK((b.affinity - o.m).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(max_abs(b.h_s.to_complex() - o.hs) < 1e-9);
  CHECK(max_abs(b.h_c.to_complex() - o.hc) < 1e-9);
  CHECK(max_abs(b.raw_s_pos.to_complex() - o.raw_s_pos) < 1e-9);
  CHECK(max_abs(b.raw_s_neg.to_complex() - o.raw_s_neg) < 1e-9);
  CHECK(max_abs(b.raw_c_pos.to_complex() - o.raw_c_pos) < 1e-9);
  CHECK(max_abs(b.raw_c_neg.to_complex() - o.raw_c_neg) < 1e-9);
  CHECK(max_abs(b.a_c_pos.to_complex() - o.a_c_pos) < 1e-9);
  CHECK(max_abs(b.a_c_neg.to_complex() - o.a_c_neg) < 1e-9);
  CHECK(max_abs(b.a_s_pos.to_complex() - o.a_s_pos) < 1e-9);
  CHECK(max_abs(b.a_s_neg.to_complex() - o.a_s_neg) < 1e-9);
  CHECK(max_abs(r.s_pos.mat.to_complex() - o.s_pos) < 1e-9);
  CHECK(max_abs(r.c_pos.mat.to_complex() - o.c_pos) < 1e-9);
  REQUIRE(r.s_neg.has_value());
  REQUIRE(r.c_neg.has_value());
  CHECK(max_abs(r.s_neg->mat.to_complex() - o.s_neg) < 1e-9);
  CHECK(max_abs(r.c_neg->mat.to_complex() - o.c_neg) < 1e-9);
  CHECK(r.c_pos.kind == MatrixKind::feature);
}

TEST_CASE("co mode drops the negative channels; singleton sizes") {
  std::mt19937_64 rng(37);
  const auto s = random_rhos(2, 3, rng), c = random_rhos(2, 3, rng);
  const AttentionParams p = AttentionParams::random(3, 2, rng);
  const AttentionResult co = run_attention(s, c, p, AttentionMode::co_attention);
  CHECK_FALSE(co.s_neg.has_value());
  CHECK_FALSE(co.c_neg.has_value());
  CHECK_FALSE(co.bundle.has_negative);

  const auto e = basis_state(3, 2);
  const AttentionResult one = run_attention({e}, {e}, p);
  CHECK(one.bundle.affinity(0, 0) == doctest::Approx(1.0));
  CHECK(one.bundle.a_c_pos.re(0, 0) == 1.0);
  CHECK(one.bundle.a_c_neg.im(0, 0) == -1.0);
}

TEST_CASE("attention block gradients on the N=2, T=3 fixture") {
  for (const auto mode : {AttentionMode::signed_attention, AttentionMode::co_attention}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      std::mt19937_64 rng(400 + seed);
      const Eigen::Index d = 4, k = 3;
      ParamStore store;
      // Density matrices are built inside the graph from kets so the check
      // also covers the stacking and the affinity path.
      store.add("ks", random_cmat(5, d, rng), true);
      store.add("kc", random_cmat(6, d, rng), true);
      const AttentionParams p = AttentionParams::random(d, k, rng);
      store.add("w_s", p.w_s, true);
      store.add("w_c", p.w_c, true);
      store.add("s_pos", p.s_pos, true);
      store.add("s_neg", p.s_neg, true);
      store.add("c_pos", p.c_pos, true);
      store.add("c_neg", p.c_neg, true);
      const LossBuilder loss = [seed, mode](Graph& g, const ParamStore& st) {
        auto rhos = [&](const char* name, int count) {
          Var kets = ops::normalize_rows_complex(st.bind(g, name));
          std::vector<Var> out;
          for (int i = 0; i < count; ++i) {
            Var rows = ops::vconcat({ops::transpose(ops::slice_cols(ops::transpose(kets), i, 1)),
                                     ops::transpose(ops::slice_cols(ops::transpose(kets), i + 1, 1))});
            out.push_back(ops::mixture(rows, g.constant(CMat(RMat::Constant(1, 2, 0.5)))));
          }
          return graph_attention::stack(out);
        };
        const graph_attention::Heads h{st.bind(g, "w_s"),   st.bind(g, "w_c"),
                                       st.bind(g, "s_pos"), st.bind(g, "s_neg"),
                                       st.bind(g, "c_pos"), st.bind(g, "c_neg")};
        const auto o = graph_attention::run(rhos("ks", 2), rhos("kc", 3), h, mode);
        Var total = ops::add(probe(o.s_pos, seed), probe(o.c_pos, seed + 1));
        if (o.has_negative) {
          total = ops::add(total, ops::add(probe(o.s_neg, seed + 2), probe(o.c_neg, seed + 3)));
        }
        return total;
      };
      const auto report = grad_check(loss, store);
      INFO("worst " << report.worst_rel_error << " in " << report.worst_parameter);
      CHECK(report.worst_rel_error < 1e-4);
    }
  }
}

}  // TEST_SUITE
