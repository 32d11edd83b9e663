#include "helpers.hpp"

#include "qsan/errors.hpp"
#include "qsan/gradcheck.hpp"
#include "qsan/params.hpp"
#include "qsan/softmax.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace qsan;
using namespace qsan::test;

namespace {

// Entrywise Cartesian product-sum, independent of the plane formulas.
ZMat oracle_multiply(const ZMat& a, const ZMat& b) {
  ZMat out = ZMat::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      std::complex<double> acc = 0.0;
      for (Eigen::Index t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<double> naive_softmax(std::vector<double> v) {
  double total = 0.0;
  for (double& x : v) total += (x = std::exp(x));
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("cmul identity, i*i and brute-force oracle") {
  std::mt19937_64 rng(1);
  const CMat b = random_cmat(3, 4, rng);
  const CMat id(RMat::Identity(3, 3));
  CHECK(max_abs(cmul(id, b).to_complex() - b.to_complex()) == 0.0);

  const CMat i1(RMat::Zero(1, 1), RMat::Ones(1, 1));
  const CMat prod = cmul(i1, i1);
  CHECK(prod.re(0, 0) == -1.0);
  CHECK(prod.im(0, 0) == 0.0);

  for (int s = 0; s < 20; ++s) {
    const CMat x = random_cmat(3, 3, rng);
    const CMat y = random_cmat(3, 3, rng);
    CHECK(max_abs(cmul(x, y).to_complex() - oracle_multiply(x.to_complex(), y.to_complex())) <
          1e-12);
  }
}

TEST_CASE("cmul associativity and tr(A A^H) real nonnegative") {
  std::mt19937_64 rng(2);
  for (int s = 0; s < 50; ++s) {
    const CMat a = random_cmat(3, 4, rng), b = random_cmat(4, 2, rng), c = random_cmat(2, 5, rng);
    CHECK(max_abs(cmul(cmul(a, b), c).to_complex() - cmul(a, cmul(b, c)).to_complex()) < 1e-10);
    const ZMat g = cmul(a, adjoint(a)).to_complex();
    CHECK(g.trace().real() >= 0.0);
    CHECK(std::abs(g.trace().imag()) < 1e-12);
  }
}

TEST_CASE("cmul shape mismatch names both shapes") {
  std::mt19937_64 rng(3);
  try {
    (void)cmul(random_cmat(2, 3, rng), random_cmat(2, 3, rng));
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("ctanh applies tanh to each part") {
  CMat z(RMat::Constant(1, 3, 0.0), RMat::Constant(1, 3, 0.0));
  z.re(0, 1) = 0.7;
  z.re(0, 2) = 1.0;
  z.im(0, 2) = 1.0;
  const CMat t = ctanh(z);
  CHECK(t.re(0, 0) == 0.0);
  CHECK(t.im(0, 0) == 0.0);
  CHECK(t.re(0, 1) == doctest::Approx(std::tanh(0.7)).epsilon(1e-15));
  CHECK(t.im(0, 1) == 0.0);
  CHECK(t.re(0, 2) == doctest::Approx(0.76159).epsilon(1e-5));
  CHECK(t.im(0, 2) == doctest::Approx(0.76159).epsilon(1e-5));
}

TEST_CASE("signed softmax worked example") {
  RVec v(4);
  v << 0.8, 0.2, -0.1, -0.6;
  const RVec pos = softmax_signed(v, Channel::pos);
  const RVec neg = softmax_signed(v, Channel::neg);
  const double ep[] = {0.45, 0.25, 0.18, 0.11};
  const double en[] = {-0.11, -0.20, -0.26, -0.43};
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(pos(i) - ep[i]) <= 0.005);
    CHECK(std::abs(neg(i) - en[i]) <= 0.005);
  }
  const RVec uniform = softmax_signed(RVec::Constant(5, 3.3), Channel::pos);
  for (double x : uniform) CHECK(x == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(softmax_signed(RVec(0), Channel::pos), std::invalid_argument);
}

TEST_CASE("signed softmax properties on random vectors") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(1, 12);
  for (int s = 0; s < 200; ++s) {
    const RVec v = random_real(len(rng), 1, rng, 3.0);
    const RVec pos = softmax_signed(v, Channel::pos);
    const RVec neg = softmax_signed(v, Channel::neg);
    CHECK((pos.array() > 0.0).all());
    CHECK((neg.array() < 0.0).all());
    CHECK(std::abs(pos.sum() - 1.0) < 1e-12);
    CHECK(std::abs(neg.sum() + 1.0) < 1e-12);

    Eigen::Index amax, amin, pmax, nmax;
    v.maxCoeff(&amax);
    v.minCoeff(&amin);
    pos.maxCoeff(&pmax);
    neg.cwiseAbs().maxCoeff(&nmax);
    CHECK(pmax == amax);
    CHECK(nmax == amin);

    const RVec shifted = softmax_signed((v.array() + 17.5).matrix(), Channel::pos);
    CHECK((shifted - pos).cwiseAbs().maxCoeff() < 1e-12);

    const auto oracle = naive_softmax(std::vector<double>(v.data(), v.data() + v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(std::abs(pos(i) - oracle[i]) < 1e-12);
  }
  // Max subtraction keeps huge inputs finite.
  RVec big(3);
  big << 1000.0, 999.0, -1000.0;
  CHECK(softmax_signed(big, Channel::pos).allFinite());
  CHECK(softmax_signed(big, Channel::neg).allFinite());
}

TEST_CASE("csoftmax per part") {
  CMat single(RMat::Constant(1, 1, 0.3), RMat::Constant(1, 1, -2.0));
  const CMat s = csoftmax(single, Channel::pos);
  CHECK(s.re(0, 0) == 1.0);
  CHECK(s.im(0, 0) == 1.0);

  std::mt19937_64 rng(5);
  const RMat x = random_real(1, 4, rng);
  const CMat r = csoftmax(CMat(x), Channel::pos);
  const auto oracle = naive_softmax({x(0, 0), x(0, 1), x(0, 2), x(0, 3)});
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(r.re(0, i) - oracle[static_cast<size_t>(i)]) < 1e-12);
    CHECK(r.im(0, i) == doctest::Approx(0.25).epsilon(1e-15));
  }

  for (int t = 0; t < 50; ++t) {
    const CMat v = random_cmat(1, 6, rng, 2.0);
    const CMat p = csoftmax(v, Channel::pos);
    const CMat n = csoftmax(v, Channel::neg);
    const CMat flipped = csoftmax(-1.0 * v, Channel::pos);
    CHECK((n.re + flipped.re).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((n.im + flipped.im).cwiseAbs().maxCoeff() <= 1e-15);
    const auto ore = naive_softmax(std::vector<double>(v.re.data(), v.re.data() + 6));
    const auto oim = naive_softmax(std::vector<double>(v.im.data(), v.im.data() + 6));
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(p.re(0, i) - ore[static_cast<size_t>(i)]) < 1e-12);
      CHECK(std::abs(p.im(0, i) - oim[static_cast<size_t>(i)]) < 1e-12);
    }
    const CMat shifted = csoftmax(CMat((v.re.array() + 3.0).matrix(), (v.im.array() - 8.0).matrix()),
                                  Channel::pos);
    CHECK((shifted.re - p.re).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((shifted.im - p.im).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("backward: analytic derivative and constant leaves") {
  Graph g;
  Var x = g.parameter("x", CMat(RMat::Constant(1, 1, 1.0)));
  Var c = g.constant(CMat(RMat::Constant(1, 1, 3.0)));
  Var r = ops::real_part(x);
  Var loss = ops::add(ops::hadamard(r, r), ops::hadamard(c, c));
  const Gradients grads = g.backward(loss);
  REQUIRE(grads.count("x") == 1);
  CHECK(grads.at("x").re(0, 0) == doctest::Approx(2.0));
  CHECK(grads.at("x").im(0, 0) == 0.0);
  CHECK(grads.size() == 1);
}

TEST_CASE("backward rejects a non-scalar loss") {
  Graph g;
  Var x = g.parameter("x", CMat(RMat::Ones(2, 2)));
  CHECK_THROWS_AS(g.backward(x), std::logic_error);
}

TEST_CASE("shared parameter gradients accumulate") {
  Graph g;
  Var a = g.parameter("w", CMat(RMat::Constant(1, 1, 2.0)));
  Var b = g.parameter("w", CMat(RMat::Constant(1, 1, 2.0)));
  Var loss = ops::real_part(ops::add(ops::hadamard(a, a), ops::scale(b, 3.0)));
  CHECK(g.backward(loss).at("w").re(0, 0) == doctest::Approx(7.0));
}

}  // TEST_SUITE

// ---------------------------------------------------------------------------
// Finite-difference checks for every operation on randomized shapes.

namespace {

struct OpCase {
  const char* name;
  // Adds the parameters it needs and returns the loss builder.
  std::function<LossBuilder(ParamStore&, std::mt19937_64&, std::uint64_t)> make;
};

Var p(Graph& g, const ParamStore& s, const char* n) { return s.bind(g, n); }

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  auto dims = [](std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(1, 4);
    return std::pair<Eigen::Index, Eigen::Index>(d(rng), d(rng));
  };
  auto unary = [&](const char* name, std::function<Var(Var)> f) {
    cases.push_back({name, [=](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                       auto [r, c] = dims(rng);
                       s.add("a", random_cmat(r, c, rng), true);
                       return LossBuilder([=](Graph& g, const ParamStore& st) {
                         return probe(f(p(g, st, "a")), seed);
                       });
                     }});
  };
  auto binary = [&](const char* name, std::function<Var(Var, Var)> f) {
    cases.push_back({name, [=](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                       auto [r, c] = dims(rng);
                       s.add("a", random_cmat(r, c, rng), true);
                       s.add("b", random_cmat(r, c, rng), true);
                       return LossBuilder([=](Graph& g, const ParamStore& st) {
                         return probe(f(p(g, st, "a"), p(g, st, "b")), seed);
                       });
                     }});
  };
  unary("scale", [](Var a) { return ops::scale(a, -1.7); });
  unary("transpose", [](Var a) { return ops::transpose(a); });
  unary("adjoint", [](Var a) { return ops::adjoint(a); });
  unary("conj", [](Var a) { return ops::conj(a); });
  unary("ctanh", [](Var a) { return ops::ctanh(a); });
  unary("real_part", [](Var a) { return ops::real_part(a); });
  unary("sum", [](Var a) { return ops::sum(a); });
  unary("csoftmax_pos", [](Var a) { return ops::csoftmax(a, Channel::pos); });
  unary("csoftmax_neg", [](Var a) { return ops::csoftmax(a, Channel::neg); });
  unary("normalize_rows", [](Var a) { return ops::normalize_rows(a); });
  unary("normalize_rows_complex", [](Var a) { return ops::normalize_rows_complex(a); });
  unary("flatten", [](Var a) { return ops::flatten(a); });
  unary("flatten_transposed", [](Var a) { return ops::flatten(a, true); });
  unary("reshape", [](Var a) {
    const auto& v = a.value();
    return ops::reshape(a, v.cols(), v.rows());
  });
  unary("slice_cols", [](Var a) {
    const auto c = a.value().cols();
    return ops::slice_cols(a, c / 2, c - c / 2);
  });
  binary("add", [](Var a, Var b) { return ops::add(a, b); });
  binary("sub", [](Var a, Var b) { return ops::sub(a, b); });
  binary("hadamard", [](Var a, Var b) { return ops::hadamard(a, b); });
  binary("polar", [](Var a, Var b) { return ops::polar(a, b); });
  binary("rowwise_dot", [](Var a, Var b) { return ops::rowwise_dot(a, b); });
  binary("hconcat", [](Var a, Var b) { return ops::hconcat({a, b, a}); });
  binary("vconcat", [](Var a, Var b) { return ops::vconcat({b, a}); });

  cases.push_back({"matmul", [](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                     std::uniform_int_distribution<int> d(1, 4);
                     const int m = d(rng), k = d(rng), n = d(rng);
                     s.add("a", random_cmat(m, k, rng), true);
                     s.add("b", random_cmat(k, n, rng), true);
                     return LossBuilder([=](Graph& g, const ParamStore& st) {
                       return probe(ops::matmul(p(g, st, "a"), p(g, st, "b")), seed);
                     });
                   }});
  cases.push_back({"gather_rows", [](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                     s.add("table", random_cmat(4, 3, rng), true);
                     const RMat extras = random_real(2, 3, rng);
                     return LossBuilder([=](Graph& g, const ParamStore& st) {
                       return probe(ops::gather_rows(p(g, st, "table"), {2, -1, 0, 2, -2}, extras),
                                    seed);
                     });
                   }});
  cases.push_back({"mixture", [](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                     std::uniform_int_distribution<int> d(1, 4);
                     const int m = d(rng), dim = d(rng);
                     s.add("states", random_cmat(m, dim, rng), true);
                     s.add("probs", CMat(random_real(1, m, rng)), false);
                     return LossBuilder([=](Graph& g, const ParamStore& st) {
                       return probe(ops::mixture(p(g, st, "states"), p(g, st, "probs")), seed);
                     });
                   }});
  cases.push_back({"softmax_xent", [](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                     s.add("logits", CMat(random_real(1, 2, rng)), false);
                     const int target = static_cast<int>(seed % 2);
                     return LossBuilder([=](Graph& g, const ParamStore& st) {
                       return ops::softmax_xent(p(g, st, "logits"), target);
                     });
                   }});
  cases.push_back({"gru", [](ParamStore& s, std::mt19937_64& rng, std::uint64_t seed) {
                     std::uniform_int_distribution<int> d(1, 4);
                     const int m = d(rng), dim = d(rng);
                     s.add("x", CMat(random_real(m, dim, rng)), false);
                     s.add("wx", CMat(random_real(dim, 3 * dim, rng, 0.7)), false);
                     s.add("wh", CMat(random_real(dim, 3 * dim, rng, 0.7)), false);
                     s.add("bx", CMat(random_real(1, 3 * dim, rng, 0.5)), false);
                     s.add("bh", CMat(random_real(1, 3 * dim, rng, 0.5)), false);
                     return LossBuilder([=](Graph& g, const ParamStore& st) {
                       return probe(ops::gru(p(g, st, "x"), p(g, st, "wx"), p(g, st, "wh"),
                                             p(g, st, "bx"), p(g, st, "bh")),
                                    seed);
                     });
                   }});
  return cases;
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("every operation passes the finite-difference check over 20 seeds") {
  for (const auto& op : op_cases()) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed * 7919 + 13);
      ParamStore store;
      const LossBuilder loss = op.make(store, rng, seed);
      worst = std::max(worst, grad_check(loss, store).worst_rel_error);
    }
    INFO("op " << op.name << " worst relative error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("three-op graph against finite differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    ParamStore store;
    store.add("a", random_cmat(2, 3, rng), true);
    store.add("b", random_cmat(2, 3, rng), true);
    const LossBuilder loss = [seed](Graph& g, const ParamStore& s) {
      return probe(ops::ctanh(ops::matmul(s.bind(g, "a"), ops::adjoint(s.bind(g, "b")))), seed);
    };
    CHECK(grad_check(loss, store).worst_rel_error < 1e-4);
  }
}

TEST_CASE("quadratic function is checked to near machine precision") {
  std::mt19937_64 rng(9);
  ParamStore store;
  store.add("x", random_cmat(3, 3, rng), true);
  const LossBuilder loss = [](Graph& g, const ParamStore& s) {
    Var x = s.bind(g, "x");
    return ops::sum(ops::real_part(ops::hadamard(x, ops::conj(x))));
  };
  CHECK(grad_check(loss, store).worst_rel_error < 1e-8);
}

TEST_CASE("a broken adjoint is caught") {
  std::mt19937_64 rng(10);
  ParamStore store;
  store.add("x", CMat(random_real(2, 2, rng)), false);
  const LossBuilder loss = [](Graph& g, const ParamStore& s) {
    Var x = s.bind(g, "x");
    const CMat& v = x.value();
    // y = x^2 entrywise but the adjoint claims dy/dx = 3x.
    CMat y((v.re.array().square()).matrix());
    Var out = g.apply("bad_square", {x}, y, [x](Graph& gr, const CMat& go) {
      gr.accumulate(x, CMat((3.0 * go.re.array() * x.value().re.array()).matrix()));
    });
    return ops::sum(out);
  };
  const auto report = grad_check(loss, store);
  CHECK(report.worst_rel_error > 1e-2);
  CHECK(report.worst_parameter == "x");
}

TEST_CASE("parameter store basics") {
  ParamStore s;
  s.add("enc.a", CMat(RMat::Ones(1, 2), RMat::Ones(1, 2)), false);
  CHECK(s.at("enc.a").value.im.isZero());
  CHECK_THROWS(s.add("enc.a", CMat(RMat::Ones(1, 1)), true));
  CHECK(parameter_group("gru_phase.wx") == "gru_phase");
  CHECK(parameter_group("plain") == "plain");
  ParamStore t = s;
  CHECK(t == s);
  t.at("enc.a").value.re(0, 0) = 2.0;
  CHECK_FALSE(t == s);
}

}  // TEST_SUITE
