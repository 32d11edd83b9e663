#pragma once

#include "qsan/params.hpp"

#include <functional>
#include <string>
#include <vector>

namespace qsan {

// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&, const ParamStore&)>;

struct GradCheckEntry {
  std::string name;
  size_t coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst_rel_error = 0.0;
  std::string worst_parameter;
};

struct GradCheckOptions {
  double step = 1e-5;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
  // Optional filter; empty checks every trainable parameter.
  std::vector<std::string> only;
};

// Compares reverse-mode gradients against central differences on every
// coordinate (real plane, plus imaginary plane for complex parameters) of the
// trainable parameters in `params`. Parameter values are restored afterwards.
GradCheckReport grad_check(const LossBuilder& loss, ParamStore& params,
                           const GradCheckOptions& options = {});

}  // namespace qsan
