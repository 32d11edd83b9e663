#include "qsan/graph.hpp"

#include <stdexcept>

namespace qsan {

const CMat& Var::value() const { return graph->value(*this); }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::check_owner(Var v) const {
  if (v.graph != this || v.id < 0 || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw std::logic_error("Var does not belong to this graph");
  }
}

Var Graph::constant(CMat value) {
  Node n;
  n.tag = "constant";
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::parameter(std::string name, CMat value) {
  Node n;
  n.tag = "parameter";
  n.value = std::move(value);
  n.requires_grad = true;
  n.param_name = std::move(name);
  return push(std::move(n));
}

Var Graph::parameter_ref(std::string name, const CMat& value) {
  Node n;
  n.tag = "parameter";
  n.external = &value;
  n.requires_grad = true;
  n.param_name = std::move(name);
  return push(std::move(n));
}

Var Graph::apply(const char* tag, std::vector<Var> inputs, CMat value, BackwardFn backward) {
  Node n;
  n.tag = tag;
  n.value = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owner(in);
    n.inputs.push_back(in.id);
    n.requires_grad = n.requires_grad || nodes_[static_cast<size_t>(in.id)].requires_grad;
  }
  if (!backward) n.requires_grad = false;
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const CMat& Graph::value(Var v) const {
  check_owner(v);
  return value(v.id);
}

const CMat& Graph::value(int id) const {
  const Node& n = nodes_.at(static_cast<size_t>(id));
  return n.external != nullptr ? *n.external : n.value;
}

void Graph::accumulate(Var target, const CMat& contribution) {
  const auto id = static_cast<size_t>(target.id);
  if (!nodes_[id].requires_grad) return;
  CMat& slot = grads_[id];
  if (slot.empty()) {
    slot = contribution;
  } else {
    slot += contribution;
  }
}

void Graph::accumulate(Var target, CMat&& contribution) {
  const auto id = static_cast<size_t>(target.id);
  if (!nodes_[id].requires_grad) return;
  CMat& slot = grads_[id];
  if (slot.empty()) {
    slot = std::move(contribution);
  } else {
    slot += contribution;
  }
}

Gradients Graph::backward(Var loss) {
  check_owner(loss);
  const CMat& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::logic_error("backward: loss must be a 1x1 scalar, got " + lv.shape_string());
  }
  if (lv.im(0, 0) != 0.0) {
    throw std::logic_error("backward: loss must be real-valued");
  }

  grads_.assign(nodes_.size(), CMat{});
  Gradients out;
  if (!nodes_[static_cast<size_t>(loss.id)].requires_grad) return out;

  grads_[static_cast<size_t>(loss.id)] = CMat(RMat::Ones(1, 1));
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    CMat& g = grads_[static_cast<size_t>(id)];
    if (!n.requires_grad || g.empty()) continue;
    if (!n.param_name.empty()) {
      auto it = out.find(n.param_name);
      if (it == out.end()) {
        out.emplace(n.param_name, std::move(g));
      } else {
        it->second += g;
      }
    } else if (n.backward) {
      n.backward(*this, g);
    }
    g = CMat{};
  }
  grads_.clear();
  return out;
}

}  // namespace qsan
