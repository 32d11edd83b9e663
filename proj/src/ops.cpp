#include "qsan/ops.hpp"

#include "qsan/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qsan::ops {

namespace {

Graph& graph_of(Var v) {
  if (!v.valid()) throw std::logic_error("invalid Var");
  return *v.graph;
}

void require_same_shape(const char* op, const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

// G * conj(b) entrywise.
CMat mul_conj(const CMat& g, const CMat& b) {
  return CMat((g.re.array() * b.re.array() + g.im.array() * b.im.array()).matrix(),
              (g.im.array() * b.re.array() - g.re.array() * b.im.array()).matrix());
}

RMat sigmoid(const RMat& x) { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); }

}  // namespace

Var add(Var a, Var b) {
  Graph& g = graph_of(a);
  require_same_shape("add", a.value(), b.value());
  return g.apply("add", {a, b}, a.value() + b.value(), [a, b](Graph& gr, const CMat& go) {
    gr.accumulate(a, go);
    gr.accumulate(b, go);
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a);
  require_same_shape("sub", a.value(), b.value());
  return g.apply("sub", {a, b}, a.value() - b.value(), [a, b](Graph& gr, const CMat& go) {
    gr.accumulate(a, go);
    gr.accumulate(b, -1.0 * go);
  });
}

Var scale(Var a, double s) {
  Graph& g = graph_of(a);
  return g.apply("scale", {a}, s * a.value(),
                 [a, s](Graph& gr, const CMat& go) { gr.accumulate(a, s * go); });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a);
  CMat out = qsan::cmul(a.value(), b.value());
  return g.apply("matmul", {a, b}, std::move(out), [a, b](Graph& gr, const CMat& go) {
    const CMat& av = gr.value(a);
    const CMat& bv = gr.value(b);
    if (gr.requires_grad(a)) {
      gr.accumulate(a, CMat(go.re * bv.re.transpose() + go.im * bv.im.transpose(),
                            go.im * bv.re.transpose() - go.re * bv.im.transpose()));
    }
    if (gr.requires_grad(b)) {
      gr.accumulate(b, CMat(av.re.transpose() * go.re + av.im.transpose() * go.im,
                            av.re.transpose() * go.im - av.im.transpose() * go.re));
    }
  });
}

Var hadamard(Var a, Var b) {
  Graph& g = graph_of(a);
  const CMat& av = a.value();
  const CMat& bv = b.value();
  require_same_shape("hadamard", av, bv);
  CMat out((av.re.array() * bv.re.array() - av.im.array() * bv.im.array()).matrix(),
           (av.re.array() * bv.im.array() + av.im.array() * bv.re.array()).matrix());
  return g.apply("hadamard", {a, b}, std::move(out), [a, b](Graph& gr, const CMat& go) {
    if (gr.requires_grad(a)) gr.accumulate(a, mul_conj(go, gr.value(b)));
    if (gr.requires_grad(b)) gr.accumulate(b, mul_conj(go, gr.value(a)));
  });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  return g.apply("transpose", {a}, qsan::transpose(a.value()),
                 [a](Graph& gr, const CMat& go) { gr.accumulate(a, qsan::transpose(go)); });
}

Var adjoint(Var a) {
  Graph& g = graph_of(a);
  return g.apply("adjoint", {a}, qsan::adjoint(a.value()),
                 [a](Graph& gr, const CMat& go) { gr.accumulate(a, qsan::adjoint(go)); });
}

Var conj(Var a) {
  Graph& g = graph_of(a);
  return g.apply("conj", {a}, qsan::conj(a.value()),
                 [a](Graph& gr, const CMat& go) { gr.accumulate(a, qsan::conj(go)); });
}

Var ctanh(Var a) {
  Graph& g = graph_of(a);
  CMat out = qsan::ctanh(a.value());
  CMat y = out;
  return g.apply("ctanh", {a}, std::move(out), [a, y](Graph& gr, const CMat& go) {
    gr.accumulate(a, CMat((go.re.array() * (1.0 - y.re.array().square())).matrix(),
                          (go.im.array() * (1.0 - y.im.array().square())).matrix()));
  });
}

Var real_part(Var a) {
  Graph& g = graph_of(a);
  return g.apply("real_part", {a}, CMat(a.value().re),
                 [a](Graph& gr, const CMat& go) { gr.accumulate(a, CMat(go.re)); });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  const CMat& av = a.value();
  CMat out(RMat::Constant(1, 1, av.re.sum()), RMat::Constant(1, 1, av.im.sum()));
  const Eigen::Index r = av.rows(), c = av.cols();
  return g.apply("sum", {a}, std::move(out), [a, r, c](Graph& gr, const CMat& go) {
    gr.accumulate(a, CMat(RMat::Constant(r, c, go.re(0, 0)), RMat::Constant(r, c, go.im(0, 0))));
  });
}

Var csoftmax(Var a, Channel channel) {
  Graph& g = graph_of(a);
  CMat out = qsan::csoftmax(a.value(), channel);
  const double sign = channel == Channel::pos ? 1.0 : -1.0;
  CMat s = sign * out;  // plain softmax of sign * a, per plane
  return g.apply("csoftmax", {a}, std::move(out), [a, s](Graph& gr, const CMat& go) {
    CMat gin = CMat::zeros(s.rows(), s.cols());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double dre = go.re.row(r).dot(s.re.row(r));
      const double dim = go.im.row(r).dot(s.im.row(r));
      gin.re.row(r) = (s.re.row(r).array() * (go.re.row(r).array() - dre)).matrix();
      gin.im.row(r) = (s.im.row(r).array() * (go.im.row(r).array() - dim)).matrix();
    }
    gr.accumulate(a, std::move(gin));
  });
}

Var polar(Var amplitude, Var phase) {
  Graph& g = graph_of(amplitude);
  const RMat& r = amplitude.value().re;
  const RMat& phi = phase.value().re;
  if (r.rows() != phi.rows() || r.cols() != phi.cols()) {
    throw ShapeError("polar: amplitude " + shape_string(r.rows(), r.cols()) + " vs phase " +
                     shape_string(phi.rows(), phi.cols()));
  }
  RMat c = phi.array().cos().matrix();
  RMat s = phi.array().sin().matrix();
  CMat out((r.array() * c.array()).matrix(), (r.array() * s.array()).matrix());
  return g.apply("polar", {amplitude, phase}, std::move(out),
                 [amplitude, phase, c, s](Graph& gr, const CMat& go) {
                   const RMat& rv = gr.value(amplitude).re;
                   if (gr.requires_grad(amplitude)) {
                     gr.accumulate(amplitude, CMat((go.re.array() * c.array() +
                                                    go.im.array() * s.array())
                                                       .matrix()));
                   }
                   if (gr.requires_grad(phase)) {
                     gr.accumulate(phase, CMat((rv.array() * (go.im.array() * c.array() -
                                                              go.re.array() * s.array()))
                                                   .matrix()));
                   }
                 });
}

Var normalize_rows(Var a) {
  Graph& g = graph_of(a);
  const RMat& x = a.value().re;
  RMat y(x.rows(), x.cols());
  RVec norms(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    norms(i) = x.row(i).norm();
    if (norms(i) < 1e-12) {
      y.row(i).setConstant(1.0 / std::sqrt(static_cast<double>(x.cols())));
    } else {
      y.row(i) = x.row(i) / norms(i);
    }
  }
  RMat yc = y;
  return g.apply("normalize_rows", {a}, CMat(std::move(y)),
                 [a, yc, norms](Graph& gr, const CMat& go) {
                   RMat gin = RMat::Zero(yc.rows(), yc.cols());
                   for (Eigen::Index i = 0; i < yc.rows(); ++i) {
                     if (norms(i) < 1e-12) continue;
                     const double proj = yc.row(i).dot(go.re.row(i));
                     gin.row(i) = (go.re.row(i) - proj * yc.row(i)) / norms(i);
                   }
                   gr.accumulate(a, CMat(std::move(gin)));
                 });
}

Var normalize_rows_complex(Var a) {
  Graph& g = graph_of(a);
  const CMat& x = a.value();
  CMat y = CMat::zeros(x.rows(), x.cols());
  RVec norms(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    norms(i) = std::sqrt(x.re.row(i).squaredNorm() + x.im.row(i).squaredNorm());
    if (norms(i) < 1e-12) {
      throw std::domain_error("degenerate projector: state " + std::to_string(i) +
                              " has norm below 1e-12");
    }
    y.re.row(i) = x.re.row(i) / norms(i);
    y.im.row(i) = x.im.row(i) / norms(i);
  }
  CMat yc = y;
  return g.apply("normalize_rows_complex", {a}, std::move(y),
                 [a, yc, norms](Graph& gr, const CMat& go) {
                   CMat gin = CMat::zeros(yc.rows(), yc.cols());
                   for (Eigen::Index i = 0; i < yc.rows(); ++i) {
                     const double proj =
                         yc.re.row(i).dot(go.re.row(i)) + yc.im.row(i).dot(go.im.row(i));
                     gin.re.row(i) = (go.re.row(i) - proj * yc.re.row(i)) / norms(i);
                     gin.im.row(i) = (go.im.row(i) - proj * yc.im.row(i)) / norms(i);
                   }
                   gr.accumulate(a, std::move(gin));
                 });
}

Var gather_rows(Var table, std::vector<int> ids, const RMat& extras) {
  Graph& g = graph_of(table);
  const CMat& t = table.value();
  CMat out = CMat::zeros(static_cast<Eigen::Index>(ids.size()), t.cols());
  for (size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const int id = ids[i];
    if (id >= 0) {
      if (id >= t.rows()) throw std::out_of_range("gather_rows: id " + std::to_string(id));
      out.re.row(row) = t.re.row(id);
      out.im.row(row) = t.im.row(id);
    } else {
      const int e = -id - 1;
      if (e >= extras.rows() || extras.cols() != t.cols()) {
        throw std::out_of_range("gather_rows: extra row " + std::to_string(e));
      }
      out.re.row(row) = extras.row(e);
    }
  }
  const Eigen::Index tr = t.rows(), tc = t.cols();
  return g.apply("gather_rows", {table}, std::move(out),
                 [table, ids = std::move(ids), tr, tc](Graph& gr, const CMat& go) {
                   CMat gin = CMat::zeros(tr, tc);
                   for (size_t i = 0; i < ids.size(); ++i) {
                     if (ids[i] < 0) continue;
                     gin.re.row(ids[i]) += go.re.row(static_cast<Eigen::Index>(i));
                     gin.im.row(ids[i]) += go.im.row(static_cast<Eigen::Index>(i));
                   }
                   gr.accumulate(table, std::move(gin));
                 });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  Graph& g = graph_of(a);
  const CMat& av = a.value();
  if (start < 0 || count < 0 || start + count > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") outside " + av.shape_string());
  }
  CMat out(av.re.middleCols(start, count), av.im.middleCols(start, count));
  const Eigen::Index r = av.rows(), c = av.cols();
  return g.apply("slice_cols", {a}, std::move(out),
                 [a, start, count, r, c](Graph& gr, const CMat& go) {
                   CMat gin = CMat::zeros(r, c);
                   gin.re.middleCols(start, count) = go.re;
                   gin.im.middleCols(start, count) = go.im;
                   gr.accumulate(a, std::move(gin));
                 });
}

Var hconcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("hconcat: no inputs");
  Graph& g = graph_of(parts.front());
  const Eigen::Index rows = parts.front().value().rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != rows) {
      throw ShapeError("hconcat: row mismatch " + p.value().shape_string());
    }
    cols += p.value().cols();
  }
  CMat out = CMat::zeros(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    out.re.middleCols(off, p.value().cols()) = p.value().re;
    out.im.middleCols(off, p.value().cols()) = p.value().im;
    off += p.value().cols();
  }
  return g.apply("hconcat", parts, std::move(out), [parts, offsets](Graph& gr, const CMat& go) {
    for (size_t i = 0; i < parts.size(); ++i) {
      if (!gr.requires_grad(parts[i])) continue;
      const Eigen::Index c = gr.value(parts[i]).cols();
      gr.accumulate(parts[i],
                    CMat(go.re.middleCols(offsets[i], c), go.im.middleCols(offsets[i], c)));
    }
  });
}

Var vconcat(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("vconcat: no inputs");
  Graph& g = graph_of(parts.front());
  const Eigen::Index cols = parts.front().value().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.value().cols() != cols) {
      throw ShapeError("vconcat: column mismatch " + p.value().shape_string());
    }
    rows += p.value().rows();
  }
  CMat out = CMat::zeros(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    out.re.middleRows(off, p.value().rows()) = p.value().re;
    out.im.middleRows(off, p.value().rows()) = p.value().im;
    off += p.value().rows();
  }
  return g.apply("vconcat", parts, std::move(out), [parts, offsets](Graph& gr, const CMat& go) {
    for (size_t i = 0; i < parts.size(); ++i) {
      if (!gr.requires_grad(parts[i])) continue;
      const Eigen::Index r = gr.value(parts[i]).rows();
      gr.accumulate(parts[i],
                    CMat(go.re.middleRows(offsets[i], r), go.im.middleRows(offsets[i], r)));
    }
  });
}

namespace {

CMat flatten_value(const CMat& a, bool transposed) {
  const Eigen::Index r = a.rows(), c = a.cols();
  CMat out = CMat::zeros(1, r * c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const Eigen::Index k = transposed ? j * r + i : i * c + j;
      out.re(0, k) = a.re(i, j);
      out.im(0, k) = a.im(i, j);
    }
  }
  return out;
}

CMat unflatten_value(const CMat& flat, Eigen::Index r, Eigen::Index c, bool transposed) {
  CMat out = CMat::zeros(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const Eigen::Index k = transposed ? j * r + i : i * c + j;
      out.re(i, j) = flat.re(0, k);
      out.im(i, j) = flat.im(0, k);
    }
  }
  return out;
}

// Row-major re-indexing shared by reshape and its adjoint.
CMat reshape_value(const CMat& a, Eigen::Index rows, Eigen::Index cols) {
  CMat out = CMat::zeros(rows, cols);
  const Eigen::Index ac = a.cols();
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    out.re(k / cols, k % cols) = a.re(k / ac, k % ac);
    out.im(k / cols, k % cols) = a.im(k / ac, k % ac);
  }
  return out;
}

}  // namespace

Var flatten(Var a, bool transposed) {
  Graph& g = graph_of(a);
  const Eigen::Index r = a.value().rows(), c = a.value().cols();
  return g.apply("flatten", {a}, flatten_value(a.value(), transposed),
                 [a, r, c, transposed](Graph& gr, const CMat& go) {
                   gr.accumulate(a, unflatten_value(go, r, c, transposed));
                 });
}

Var reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  Graph& g = graph_of(a);
  const CMat& av = a.value();
  if (rows * cols != av.size()) {
    throw ShapeError("reshape: cannot view " + av.shape_string() + " as " +
                     shape_string(rows, cols));
  }
  const Eigen::Index r = av.rows(), c = av.cols();
  return g.apply("reshape", {a}, reshape_value(av, rows, cols),
                 [a, r, c](Graph& gr, const CMat& go) {
                   gr.accumulate(a, reshape_value(go, r, c));
                 });
}

Var mixture(Var states, Var probs) {
  Graph& g = graph_of(states);
  const CMat& w = states.value();
  const RMat& p = probs.value().re;
  if (p.rows() != 1 || p.cols() != w.rows()) {
    throw ShapeError("mixture: probabilities " + shape_string(p.rows(), p.cols()) +
                     " do not match states " + w.shape_string());
  }
  const auto weights = p.row(0).transpose().asDiagonal();
  CMat wp(weights * w.re, weights * w.im);
  // rho[a,b] = sum_i p_i w[i,a] conj(w[i,b])
  CMat out = qsan::cmul(qsan::transpose(wp), qsan::conj(w));
  return g.apply("mixture", {states, probs}, std::move(out),
                 [states, probs, wp](Graph& gr, const CMat& go) {
                   const CMat& wv = gr.value(states);
                   if (gr.requires_grad(states)) {
                     CMat k = go + qsan::adjoint(go);
                     gr.accumulate(states, qsan::cmul(wp, qsan::transpose(k)));
                   }
                   if (gr.requires_grad(probs)) {
                     CMat t = qsan::cmul(qsan::conj(wv), go);
                     RMat gp = (t.re.array() * wv.re.array() - t.im.array() * wv.im.array())
                                   .rowwise()
                                   .sum()
                                   .transpose()
                                   .matrix();
                     gr.accumulate(probs, CMat(std::move(gp)));
                   }
                 });
}

Var rowwise_dot(Var a, Var b) {
  Graph& g = graph_of(a);
  const CMat& av = a.value();
  const CMat& bv = b.value();
  require_same_shape("rowwise_dot", av, bv);
  CMat out((av.re.array() * bv.re.array() - av.im.array() * bv.im.array()).rowwise().sum().matrix(),
           (av.re.array() * bv.im.array() + av.im.array() * bv.re.array()).rowwise().sum().matrix());
  return g.apply("rowwise_dot", {a, b}, std::move(out), [a, b](Graph& gr, const CMat& go) {
    const CMat& avv = gr.value(a);
    const CMat& bvv = gr.value(b);
    const Eigen::Index cols = avv.cols();
    CMat gb(go.re.replicate(1, cols), go.im.replicate(1, cols));
    if (gr.requires_grad(a)) gr.accumulate(a, mul_conj(gb, bvv));
    if (gr.requires_grad(b)) gr.accumulate(b, mul_conj(gb, avv));
  });
}

Var softmax_xent(Var logits, int target) {
  Graph& g = graph_of(logits);
  const RMat& z = logits.value().re;
  if (z.rows() != 1 || target < 0 || target >= z.cols()) {
    throw ShapeError("softmax_xent: logits " + shape_string(z.rows(), z.cols()) +
                     " with target " + std::to_string(target));
  }
  RVec p = softmax_signed(z.row(0).transpose(), Channel::pos);
  const double shift = z.maxCoeff();
  const double lse = shift + std::log((z.array() - shift).exp().sum());
  CMat out(RMat::Constant(1, 1, lse - z(0, target)));
  return g.apply("softmax_xent", {logits}, std::move(out),
                 [logits, p, target](Graph& gr, const CMat& go) {
                   RMat gz = p.transpose();
                   gz(0, target) -= 1.0;
                   gr.accumulate(logits, CMat(go.re(0, 0) * gz));
                 });
}

Var gru(Var x, Var wx, Var wh, Var bx, Var bh) {
  Graph& g = graph_of(x);
  const RMat& xv = x.value().re;
  const RMat& wxv = wx.value().re;
  const RMat& whv = wh.value().re;
  const RMat& bxv = bx.value().re;
  const RMat& bhv = bh.value().re;
  const Eigen::Index h = whv.rows();
  const Eigen::Index steps = xv.rows();
  if (wxv.rows() != xv.cols() || wxv.cols() != 3 * h || whv.cols() != 3 * h ||
      bxv.rows() != 1 || bxv.cols() != 3 * h || bhv.rows() != 1 || bhv.cols() != 3 * h) {
    throw ShapeError("gru: inconsistent shapes x " + shape_string(xv.rows(), xv.cols()) +
                     ", wx " + shape_string(wxv.rows(), wxv.cols()) + ", wh " +
                     shape_string(whv.rows(), whv.cols()));
  }

  const RMat xg = (xv * wxv).rowwise() + bxv.row(0);
  RMat hs = RMat::Zero(steps, h);
  RMat rs(steps, h), zs(steps, h), ns(steps, h), hn(steps, h);
  RMat prev = RMat::Zero(1, h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const RMat hg = prev * whv + bhv;
    rs.row(t) = sigmoid(xg.row(t).head(h) + hg.leftCols(h));
    zs.row(t) = sigmoid(xg.row(t).segment(h, h) + hg.middleCols(h, h));
    hn.row(t) = hg.rightCols(h);
    ns.row(t) = (xg.row(t).tail(h).array() + rs.row(t).array() * hn.row(t).array())
                    .tanh()
                    .matrix();
    hs.row(t) = ((1.0 - zs.row(t).array()) * ns.row(t).array() +
                 zs.row(t).array() * prev.row(0).array())
                    .matrix();
    prev = hs.row(t);
  }

  return g.apply(
      "gru", {x, wx, wh, bx, bh}, CMat(hs),
      [x, wx, wh, bx, bh, hs, rs, zs, ns, hn, h, steps](Graph& gr, const CMat& go) {
        const RMat& xval = gr.value(x).re;
        const RMat& wxval = gr.value(wx).re;
        const RMat& whval = gr.value(wh).re;
        RMat dwx = RMat::Zero(wxval.rows(), wxval.cols());
        RMat dwh = RMat::Zero(whval.rows(), whval.cols());
        RMat dbx = RMat::Zero(1, 3 * h);
        RMat dbh = RMat::Zero(1, 3 * h);
        RMat dx = RMat::Zero(xval.rows(), xval.cols());
        RMat carry = RMat::Zero(1, h);
        RMat dxg(1, 3 * h), dhg(1, 3 * h);
        for (Eigen::Index t = steps - 1; t >= 0; --t) {
          const RMat hprev = t > 0 ? RMat(hs.row(t - 1)) : RMat(RMat::Zero(1, h));
          const auto r = rs.row(t).array();
          const auto z = zs.row(t).array();
          const auto n = ns.row(t).array();
          const RMat dh = go.re.row(t) + carry;
          const auto dha = dh.array();
          const RMat dn_pre = (dha * (1.0 - z) * (1.0 - n.square())).matrix();
          const RMat dz_pre = (dha * (hprev.array() - n) * z * (1.0 - z)).matrix();
          const RMat dr_pre = (dn_pre.array() * hn.row(t).array() * r * (1.0 - r)).matrix();
          dxg << dr_pre, dz_pre, dn_pre;
          dhg << dr_pre, dz_pre, (dn_pre.array() * r).matrix();
          dwx.noalias() += xval.row(t).transpose() * dxg;
          dbx += dxg;
          dwh.noalias() += hprev.transpose() * dhg;
          dbh += dhg;
          dx.row(t) = dxg * wxval.transpose();
          carry = (dha * z).matrix() + dhg * whval.transpose();
        }
        gr.accumulate(x, CMat(std::move(dx)));
        gr.accumulate(wx, CMat(std::move(dwx)));
        gr.accumulate(wh, CMat(std::move(dwh)));
        gr.accumulate(bx, CMat(std::move(dbx)));
        gr.accumulate(bh, CMat(std::move(dbh)));
      });
}

}  // namespace qsan::ops
