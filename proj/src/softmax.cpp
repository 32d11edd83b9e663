#include "qsan/softmax.hpp"

#include <stdexcept>

namespace qsan {

const char* to_string(Channel c) { return c == Channel::pos ? "pos" : "neg"; }

namespace {

template <typename Derived>
void softmax_inplace(Eigen::MatrixBase<Derived>&& row) {
  const double shift = row.maxCoeff();
  row.array() = (row.array() - shift).exp();
  row /= row.sum();
}

}  // namespace

RVec softmax_signed(const RVec& v, Channel channel) {
  if (v.size() == 0) throw std::invalid_argument("softmax_signed: empty vector");
  RVec out = channel == Channel::pos ? RVec(v) : RVec(-v);
  softmax_inplace(out.col(0));
  if (channel == Channel::neg) out = -out;
  return out;
}

CMat csoftmax(const CMat& v, Channel channel) {
  if (v.empty()) throw std::invalid_argument("csoftmax: empty vector");
  const double sign = channel == Channel::pos ? 1.0 : -1.0;
  CMat out(sign * v.re, sign * v.im);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    softmax_inplace(out.re.row(r));
    softmax_inplace(out.im.row(r));
  }
  if (channel == Channel::neg) out = -1.0 * out;
  return out;
}

}  // namespace qsan
