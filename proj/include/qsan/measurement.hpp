#pragma once

#include "qsan/encoder.hpp"
#include "qsan/graph.hpp"

#include <random>

namespace qsan {

// Z rank-one measurement states and the affine classifier on the
// concatenated measurement vector. Output index 0 is the "false" class.
struct MeasurementBank {
  CMat states;  // Z x d, row z is |v_z> (unnormalized)
  RMat weight;  // 2 x width
  RVec bias;    // 2

  Eigen::Index size() const { return states.rows(); }
  static MeasurementBank random(Eigen::Index d, Eigen::Index z, Eigen::Index width,
                                std::mt19937_64& rng);
};

// q_z = Re <v_z|rho|v_z> / <v_z|v_z>.
RVec measure(const DensityMatrix& rho, const MeasurementBank& bank);

struct Classification {
  RVec logits;         // 2
  RVec probabilities;  // 2, index 0 = false
  double loss = 0.0;
};

// Label 1 (false) maps to the one-hot target [1, 0].
Classification classify_loss(const RVec& features, int label, const MeasurementBank& bank);

// Output index of a label and back.
int class_index(int label);
int label_of_class(int index);

namespace graph_measurement {

// 1 x Z real row of measurement outcomes of a d x d matrix.
Var measure(Var rho, Var states);
// 1 x 2 logits.
Var classify(Var features, Var weight, Var bias);

}  // namespace graph_measurement

}  // namespace qsan
