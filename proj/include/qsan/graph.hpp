#pragma once

#include "qsan/cmat.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace qsan {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const CMat& value() const;
  bool valid() const { return graph != nullptr && id >= 0; }
};

// Gradient of a real scalar with respect to each trainable leaf, keyed by
// parameter name. The real plane holds d/d(re), the imaginary plane d/d(im).
using Gradients = std::map<std::string, CMat>;

// Reverse-mode tape over complex matrices. Nodes are appended in evaluation
// order, so the node list is already topologically sorted. Each complex entry
// is differentiated as two independent real coordinates.
class Graph {
 public:
  // Receives the gradient of the node's output and pushes contributions into
  // its inputs through Graph::accumulate.
  using BackwardFn = std::function<void(Graph&, const CMat&)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(CMat value);
  // Trainable leaf owning its value.
  Var parameter(std::string name, CMat value);
  // Trainable leaf referencing a value owned elsewhere; `value` must outlive the graph.
  Var parameter_ref(std::string name, const CMat& value);

  // Appends an operation node. `backward` may be empty for non-differentiable outputs.
  Var apply(const char* tag, std::vector<Var> inputs, CMat value, BackwardFn backward);

  const CMat& value(Var v) const;
  const CMat& value(int id) const;
  const char* tag(Var v) const { return nodes_.at(static_cast<size_t>(v.id)).tag; }
  bool requires_grad(Var v) const { return nodes_.at(static_cast<size_t>(v.id)).requires_grad; }
  size_t size() const { return nodes_.size(); }

  // Adds `contribution` to the pending gradient of `target`. No-op for nodes
  // that do not depend on any trainable leaf.
  void accumulate(Var target, const CMat& contribution);
  void accumulate(Var target, CMat&& contribution);

  // Runs the reverse sweep from a 1x1 real loss node.
  Gradients backward(Var loss);

 private:
  struct Node {
    const char* tag = "";
    std::vector<int> inputs;
    CMat value;
    const CMat* external = nullptr;
    BackwardFn backward;
    bool requires_grad = false;
    std::string param_name;
  };

  Var push(Node node);
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  std::vector<CMat> grads_;
};

}  // namespace qsan
