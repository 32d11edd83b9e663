#include "qsan/params.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsan {

Parameter& ParamStore::add(std::string name, CMat value, bool is_complex, bool trainable) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  if (!is_complex) value.im.setZero();
  items_.push_back(Parameter{std::move(name), std::move(value), is_complex, trainable});
  return items_.back();
}

bool ParamStore::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(),
                     [&](const Parameter& p) { return p.name == name; });
}

Parameter& ParamStore::at(const std::string& name) {
  for (auto& p : items_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("unknown parameter " + name);
}

const Parameter& ParamStore::at(const std::string& name) const {
  for (const auto& p : items_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("unknown parameter " + name);
}

Var ParamStore::bind(Graph& g, const std::string& name) const {
  const Parameter& p = at(name);
  if (p.trainable) return g.parameter_ref(p.name, p.value);
  return g.constant(p.value);
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (items_.size() != other.items_.size()) return false;
  for (size_t i = 0; i < items_.size(); ++i) {
    const Parameter& a = items_[i];
    const Parameter& b = other.items_[i];
    if (a.name != b.name || a.is_complex != b.is_complex || a.trainable != b.trainable) {
      return false;
    }
    if (a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
    if (a.value.re != b.value.re || a.value.im != b.value.im) return false;
  }
  return true;
}

std::string parameter_group(const std::string& name) {
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace qsan
