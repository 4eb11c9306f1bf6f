#ifndef DRN_AD_TENSOR_H_
#define DRN_AD_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

// Minimal tape-based reverse-mode differentiation over dense row-major
// tensors. Every op views its inputs as [rows x cols] with cols = last dim.

namespace drn::ad {

using Shape = std::vector<int>;

size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

template <typename T>
class Parameter {
 public:
  Parameter(std::string name, Shape shape)
      : name_(std::move(name)),
        shape_(std::move(shape)),
        value_(NumElements(shape_), T(0)),
        grad_(value_.size(), T(0)) {}

  const std::string& name() const { return name_; }
  const Shape& shape() const { return shape_; }
  size_t size() const { return value_.size(); }

  std::vector<T>& value() { return value_; }
  const std::vector<T>& value() const { return value_; }
  std::vector<T>& grad() { return grad_; }
  const std::vector<T>& grad() const { return grad_; }

 private:
  std::string name_;
  Shape shape_;
  std::vector<T> value_;
  std::vector<T> grad_;
};

// Ordered, named collection of parameters. Addresses are stable.
template <typename T>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet& other) { *this = other; }
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter<T>& Add(const std::string& name, Shape shape);

  bool Contains(const std::string& name) const {
    return index_.count(name) != 0;
  }
  Parameter<T>& Get(const std::string& name);
  const Parameter<T>& Get(const std::string& name) const;

  int count() const { return static_cast<int>(params_.size()); }
  Parameter<T>& operator[](int i) { return *params_[i]; }
  const Parameter<T>& operator[](int i) const { return *params_[i]; }

  size_t TotalElements() const;
  void ZeroGrad();
  double GradNorm() const;
  // Multiplies every gradient by `factor`.
  void ScaleGrad(double factor);

  template <typename U>
  ParameterSet<U> Cast() const {
    ParameterSet<U> out;
    for (const auto& p : params_) {
      auto& q = out.Add(p->name(), p->shape());
      for (size_t i = 0; i < p->size(); ++i) {
        q.value()[i] = static_cast<U>(p->value()[i]);
      }
    }
    return out;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, int> index_;
};

template <typename T>
class Graph;

// Lightweight handle to a graph node.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(Graph<T>* graph, int id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph<T>* graph() const { return graph_; }
  int id() const { return id_; }

  const Shape& shape() const;
  int rows() const;
  int cols() const;
  size_t size() const;
  bool requires_grad() const;

  std::span<const T> value() const;
  // Gradient buffer; allocated (zeroed) on first access.
  std::span<T> grad() const;
  T item() const;

 private:
  Graph<T>* graph_ = nullptr;
  int id_ = -1;
};

template <typename T>
class Graph {
 public:
  // Called with the id of the node being differentiated.
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor<T> Constant(Shape shape, std::vector<T> values);
  // Leaf that receives a gradient.
  Tensor<T> Variable(Shape shape, std::vector<T> values);
  // Leaf viewing the parameter's storage. The parameter must outlive the
  // graph and stay unmodified until backward completes.
  Tensor<T> Param(const Parameter<T>& param);

  // Appends a node whose value has already been computed. `backward` is kept
  // only when gradients are enabled and some parent requires them.
  Tensor<T> AddNode(Shape shape, std::vector<T> value,
                    std::initializer_list<Tensor<T>> parents,
                    BackwardFn backward);
  Tensor<T> AddNode(Shape shape, std::vector<T> value,
                    const std::vector<Tensor<T>>& parents,
                    BackwardFn backward);

  // Reverse sweep from a scalar loss. Throws if the loss is not scalar.
  void Backward(const Tensor<T>& loss);

  // Adds parameter-leaf gradients into matching entries of `into`
  // (matched by parameter identity, falling back to name).
  void CollectParamGrads(ParameterSet<T>& into) const;

  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  size_t num_nodes() const { return nodes_.size(); }

  // Node accessors used by op implementations.
  const Shape& shape(int id) const { return nodes_[id].shape; }
  std::span<const T> value(int id) const;
  std::span<T> grad(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.empty(); }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Shape shape;
    size_t size = 0;
    std::vector<T> owned;
    const T* external = nullptr;
    std::vector<T> grad;
    bool requires_grad = false;
    const Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace drn::ad

#endif  // DRN_AD_TENSOR_H_
