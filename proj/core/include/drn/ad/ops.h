#ifndef DRN_AD_OPS_H_
#define DRN_AD_OPS_H_

#include <span>
#include <vector>

#include "drn/ad/tensor.h"

namespace drn::ad {

// y = x W^T + b for x [rows x in], W [out x in], b [out] (optional).
template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>* bias = nullptr);

template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>& bias) {
  return Linear(x, weight, &bias);
}

// Normalizes every row over its last dimension, then applies gamma/beta.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, double eps = 1e-5);

// y = x for x >= 0, alpha[col] * x otherwise. The subgradient at 0 takes the
// positive branch.
template <typename T>
Tensor<T> PRelu(const Tensor<T>& x, const Tensor<T>& alpha);

template <typename T>
struct LstmState {
  std::vector<T> h;
  std::vector<T> c;

  static LstmState Zeros(int hidden) {
    return {std::vector<T>(hidden, T(0)), std::vector<T>(hidden, T(0))};
  }
};

// Causal single-layer LSTM over the rows of x [T x in] with gate order
// (input, forget, candidate, output):
//   w_ih [4H x in], w_hh [4H x H], bias [4H].
// The initial state is treated as a constant; the final state is written to
// `final_state` (detached) when non-null.
template <typename T>
Tensor<T> Lstm(const Tensor<T>& x, const Tensor<T>& w_ih,
               const Tensor<T>& w_hh, const Tensor<T>& bias,
               const LstmState<T>& initial, LstmState<T>* final_state);

template <typename T>
Tensor<T> Lstm(const Tensor<T>& x, const Tensor<T>& w_ih,
               const Tensor<T>& w_hh, const Tensor<T>& bias,
               const LstmState<T>& initial) {
  return Lstm(x, w_ih, w_hh, bias, initial, static_cast<LstmState<T>*>(nullptr));
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b);
// Elementwise product; gradients reach both operands.
template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> Scale(const Tensor<T>& x, double factor);

// Column-wise concatenation of tensors with equal row counts.
template <typename T>
Tensor<T> ConcatCols(const std::vector<Tensor<T>>& parts);
// Columns [begin, begin + count) of every row.
template <typename T>
Tensor<T> SliceCols(const Tensor<T>& x, int begin, int count);

template <typename T>
Tensor<T> Sum(const Tensor<T>& x);
template <typename T>
Tensor<T> Mean(const Tensor<T>& x);

// Linear layer applied to one-hot rows: y_t = W[:, index_t] + b, with
// W [out x depth]. Equivalent to Linear(onehot, W, b) but touches a single
// weight column per row.
template <typename T>
Tensor<T> OneHotLinear(std::span<const int> indices, int depth,
                       const Tensor<T>& weight, const Tensor<T>* bias);

// Dense one-hot matrix [T x depth].
template <typename T>
std::vector<T> OneHotRows(std::span<const int> indices, int depth);

// Overlap-add of frames [T x oW] with shift R and synthesis window, frame t
// starting at output index t*R. `carry` (length oW - R, constant) is added
// to the first oW - R outputs. Result: [1 x (T*R + oW - R)].
template <typename T>
Tensor<T> OverlapAdd(const Tensor<T>& frames, int shift,
                     std::span<const double> window,
                     std::span<const T> carry);

}  // namespace drn::ad

#endif  // DRN_AD_OPS_H_
