#include "qsan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace qsan {

namespace {

double evaluate(const LossBuilder& loss, const ParamStore& params) {
  Graph g;
  return loss(g, params).value().re(0, 0);
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, ParamStore& params,
                           const GradCheckOptions& options) {
  Gradients grads;
  {
    Graph g;
    grads = g.backward(loss(g, params));
  }

  GradCheckReport report;
  for (Parameter& p : params.items()) {
    if (!p.trainable) continue;
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), p.name) == options.only.end()) {
      continue;
    }
    GradCheckEntry entry;
    entry.name = p.name;
    const auto found = grads.find(p.name);
    const CMat zero = CMat::zeros(p.value.rows(), p.value.cols());
    const CMat& analytic = found == grads.end() ? zero : found->second;

    const int planes = p.is_complex ? 2 : 1;
    for (int plane = 0; plane < planes; ++plane) {
      RMat& values = plane == 0 ? p.value.re : p.value.im;
      const RMat& a = plane == 0 ? analytic.re : analytic.im;
      for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double orig = values.data()[i];
        values.data()[i] = orig + options.step;
        const double up = evaluate(loss, params);
        values.data()[i] = orig - options.step;
        const double down = evaluate(loss, params);
        values.data()[i] = orig;

        const double numeric = (up - down) / (2.0 * options.step);
        const double an = a.data()[i];
        const double abs_err = std::abs(an - numeric);
        const double denom = std::max({std::abs(an), std::abs(numeric), options.floor});
        entry.max_abs_error = std::max(entry.max_abs_error, abs_err);
        entry.max_rel_error = std::max(entry.max_rel_error, abs_err / denom);
        ++entry.coordinates;
      }
    }
    if (entry.max_rel_error >= report.worst_rel_error) {
      report.worst_rel_error = entry.max_rel_error;
      report.worst_parameter = entry.name;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace qsan
