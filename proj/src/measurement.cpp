#include "qsan/measurement.hpp"

#include "qsan/errors.hpp"
#include "qsan/ops.hpp"
#include "qsan/softmax.hpp"

#include <cmath>
#include <stdexcept>

namespace qsan {

MeasurementBank MeasurementBank::random(Eigen::Index d, Eigen::Index z, Eigen::Index width,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  std::uniform_real_distribution<double> lin(-bound, bound);
  MeasurementBank b;
  b.states = CMat::zeros(z, d);
  for (Eigen::Index i = 0; i < b.states.size(); ++i) b.states.re.data()[i] = unit(rng);
  for (Eigen::Index i = 0; i < b.states.size(); ++i) b.states.im.data()[i] = unit(rng);
  b.weight = RMat(2, width);
  for (Eigen::Index i = 0; i < b.weight.size(); ++i) b.weight.data()[i] = lin(rng);
  b.bias = RVec::Zero(2);
  return b;
}

RVec measure(const DensityMatrix& rho, const MeasurementBank& bank) {
  if (rho.mat.rows() != rho.mat.cols() || rho.mat.rows() != bank.states.cols()) {
    throw ShapeError("measure: matrix " + rho.mat.shape_string() + " vs states " +
                     bank.states.shape_string());
  }
  Graph g;
  Var q = graph_measurement::measure(g.constant(rho.mat), g.constant(bank.states));
  return q.value().re.row(0).transpose();
}

int class_index(int label) {
  if (label != 0 && label != 1) throw std::invalid_argument("label must be 0 or 1");
  return label == 1 ? 0 : 1;
}

int label_of_class(int index) { return index == 0 ? 1 : 0; }

Classification classify_loss(const RVec& features, int label, const MeasurementBank& bank) {
  if (features.size() != bank.weight.cols()) {
    throw ShapeError("classify_loss: feature width " + std::to_string(features.size()) +
                     " vs classifier width " + std::to_string(bank.weight.cols()));
  }
  Graph g;
  Var logits = graph_measurement::classify(g.constant(CMat(RMat(features.transpose()))),
                                           g.constant(CMat(bank.weight)),
                                           g.constant(CMat(RMat(bank.bias.transpose()))));
  Var loss = ops::softmax_xent(logits, class_index(label));
  Classification c;
  c.logits = logits.value().re.row(0).transpose();
  c.probabilities = softmax_signed(c.logits, Channel::pos);
  c.loss = loss.value().re(0, 0);
  return c;
}

namespace graph_measurement {

Var measure(Var rho, Var states) {
  const CMat& r = rho.value();
  const CMat& s = states.value();
  if (r.rows() != r.cols() || r.rows() != s.cols()) {
    throw ShapeError("measure: matrix " + r.shape_string() + " vs states " + s.shape_string());
  }
  Var unit = ops::normalize_rows_complex(states);
  // (conj(U) rho)[z, b] summed against U[z, b] gives <u_z|rho|u_z>.
  Var left = ops::matmul(ops::conj(unit), rho);
  return ops::transpose(ops::real_part(ops::rowwise_dot(left, unit)));
}

Var classify(Var features, Var weight, Var bias) {
  if (features.value().cols() != weight.value().cols()) {
    throw ShapeError("classify: feature width " + std::to_string(features.value().cols()) +
                     " vs classifier width " + std::to_string(weight.value().cols()));
  }
  return ops::real_part(ops::add(ops::matmul(features, ops::transpose(weight)), bias));
}

}  // namespace graph_measurement

}  // namespace qsan
