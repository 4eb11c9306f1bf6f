#include "drn/ad/tensor.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace drn::ad {

size_t NumElements(const Shape& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative dimension in shape");
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << "]";
  return out.str();
}

// ---------------------------------------------------------------- params

template <typename T>
ParameterSet<T>& ParameterSet<T>::operator=(const ParameterSet& other) {
  if (this == &other) return *this;
  params_.clear();
  index_.clear();
  for (const auto& p : other.params_) {
    auto& q = Add(p->name(), p->shape());
    q.value() = p->value();
    q.grad() = p->grad();
  }
  return *this;
}

template <typename T>
Parameter<T>& ParameterSet<T>::Add(const std::string& name, Shape shape) {
  if (Contains(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  index_[name] = static_cast<int>(params_.size());
  params_.push_back(std::make_unique<Parameter<T>>(name, std::move(shape)));
  return *params_.back();
}

template <typename T>
Parameter<T>& ParameterSet<T>::Get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

template <typename T>
const Parameter<T>& ParameterSet<T>::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

template <typename T>
size_t ParameterSet<T>::TotalElements() const {
  size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

template <typename T>
void ParameterSet<T>::ZeroGrad() {
  for (auto& p : params_) std::fill(p->grad().begin(), p->grad().end(), T(0));
}

template <typename T>
double ParameterSet<T>::GradNorm() const {
  double sum = 0.0;
  for (const auto& p : params_) {
    for (T g : p->grad()) sum += static_cast<double>(g) * g;
  }
  return std::sqrt(sum);
}

template <typename T>
void ParameterSet<T>::ScaleGrad(double factor) {
  for (auto& p : params_) {
    for (T& g : p->grad()) g = static_cast<T>(g * factor);
  }
}

// ---------------------------------------------------------------- tensor

template <typename T>
const Shape& Tensor<T>::shape() const {
  return graph_->shape(id_);
}

template <typename T>
int Tensor<T>::cols() const {
  const Shape& s = shape();
  return s.empty() ? 1 : s.back();
}

template <typename T>
int Tensor<T>::rows() const {
  const int c = cols();
  return c == 0 ? 0 : static_cast<int>(size() / c);
}

template <typename T>
size_t Tensor<T>::size() const {
  return graph_->value(id_).size();
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return graph_->requires_grad(id_);
}

template <typename T>
std::span<const T> Tensor<T>::value() const {
  return graph_->value(id_);
}

template <typename T>
std::span<T> Tensor<T>::grad() const {
  return graph_->grad(id_);
}

template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw std::logic_error("item() on non-scalar tensor");
  return value()[0];
}

// ---------------------------------------------------------------- graph

template <typename T>
std::span<const T> Graph<T>::value(int id) const {
  const Node& n = nodes_[id];
  if (n.external) return {n.external, n.size};
  return {n.owned.data(), n.size};
}

template <typename T>
std::span<T> Graph<T>::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && n.size > 0) n.grad.assign(n.size, T(0));
  return {n.grad.data(), n.grad.size()};
}

template <typename T>
Tensor<T> Graph<T>::Constant(Shape shape, std::vector<T> values) {
  if (values.size() != NumElements(shape)) {
    throw std::invalid_argument("Constant: value count does not match shape " +
                                ShapeToString(shape));
  }
  Node n;
  n.size = values.size();
  n.shape = std::move(shape);
  n.owned = std::move(values);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Tensor<T> Graph<T>::Variable(Shape shape, std::vector<T> values) {
  Tensor<T> t = Constant(std::move(shape), std::move(values));
  nodes_[t.id()].requires_grad = grad_enabled_;
  return t;
}

template <typename T>
Tensor<T> Graph<T>::Param(const Parameter<T>& param) {
  Node n;
  n.shape = param.shape();
  n.size = param.size();
  n.external = param.value().data();
  n.requires_grad = grad_enabled_;
  n.param = &param;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Tensor<T> Graph<T>::AddNode(Shape shape, std::vector<T> value,
                            std::initializer_list<Tensor<T>> parents,
                            BackwardFn backward) {
  return AddNode(std::move(shape), std::move(value),
                 std::vector<Tensor<T>>(parents), std::move(backward));
}

template <typename T>
Tensor<T> Graph<T>::AddNode(Shape shape, std::vector<T> value,
                            const std::vector<Tensor<T>>& parents,
                            BackwardFn backward) {
  if (value.size() != NumElements(shape)) {
    throw std::logic_error("AddNode: value size does not match shape " +
                           ShapeToString(shape));
  }
  bool needs = false;
  for (const auto& p : parents) {
    if (p.graph() != this) throw std::logic_error("AddNode: foreign tensor");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  Node n;
  n.size = value.size();
  n.shape = std::move(shape);
  n.owned = std::move(value);
  n.requires_grad = grad_enabled_ && needs;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
void Graph<T>::Backward(const Tensor<T>& loss) {
  if (loss.graph() != this) throw std::logic_error("Backward: foreign tensor");
  if (nodes_[loss.id()].size != 1) {
    throw std::invalid_argument("Backward: loss must be a scalar, got shape " +
                                ShapeToString(nodes_[loss.id()].shape));
  }
  grad(loss.id())[0] += T(1);
  // Nodes are appended in topological order; each is visited once.
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
}

template <typename T>
void Graph<T>::CollectParamGrads(ParameterSet<T>& into) const {
  std::unordered_map<const Parameter<T>*, Parameter<T>*> by_address;
  for (int i = 0; i < into.count(); ++i) by_address[&into[i]] = &into[i];
  for (const Node& n : nodes_) {
    if (!n.param || n.grad.empty()) continue;
    Parameter<T>* target = nullptr;
    if (auto it = by_address.find(n.param); it != by_address.end()) {
      target = it->second;
    } else if (into.Contains(n.param->name())) {
      target = &into.Get(n.param->name());
    }
    if (!target) continue;
    if (target->size() != n.grad.size()) {
      throw std::logic_error("CollectParamGrads: size mismatch for " +
                             n.param->name());
    }
    for (size_t i = 0; i < n.grad.size(); ++i) target->grad()[i] += n.grad[i];
  }
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class Tensor<float>;
template class Tensor<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace drn::ad
