#pragma once

#include "qsan/graph.hpp"

#include <string>
#include <vector>

namespace qsan {

struct Parameter {
  std::string name;
  CMat value;
  // Real-valued parameters keep a zero imaginary plane and never receive
  // imaginary gradient.
  bool is_complex = false;
  bool trainable = true;
};

// Ordered, named collection of model tensors.
class ParamStore {
 public:
  Parameter& add(std::string name, CMat value, bool is_complex, bool trainable = true);

  bool contains(const std::string& name) const;
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;

  std::vector<Parameter>& items() { return items_; }
  const std::vector<Parameter>& items() const { return items_; }

  // Leaf for `name` on `g`: a trainable reference when the parameter is
  // trainable, otherwise a constant copy.
  Var bind(Graph& g, const std::string& name) const;

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Parameter> items_;
};

// Parameter group of a tensor name: the part before the first '.',
// e.g. "gru_amplitude" for "gru_amplitude.wx".
std::string parameter_group(const std::string& name);

}  // namespace qsan
