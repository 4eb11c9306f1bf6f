#include "drn/ad/ops.h"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

#include "drn/dsp/framing.h"

namespace drn::ad {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using ConstMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MutMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using MutVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
ConstMap<T> AsMat(std::span<const T> v, int rows, int cols) {
  return ConstMap<T>(v.data(), rows, cols);
}
template <typename T>
MutMap<T> AsMat(std::span<T> v, int rows, int cols) {
  return MutMap<T>(v.data(), rows, cols);
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

template <typename T>
Shape RowsCols(const Tensor<T>& like, int cols) {
  Shape s = like.shape();
  if (s.empty()) s = {1};
  s.back() = cols;
  return s;
}

template <typename T>
T Sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
Tensor<T> Linear(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>* bias) {
  Graph<T>* g = x.graph();
  const int rows = x.rows();
  const int in = x.cols();
  Require(weight.shape().size() == 2, "Linear: weight must be 2-D");
  const int out = weight.shape()[0];
  Require(weight.shape()[1] == in,
          "Linear: inner dimension mismatch, x " + ShapeToString(x.shape()) +
              " vs weight " + ShapeToString(weight.shape()));
  if (bias) {
    Require(static_cast<int>(bias->size()) == out, "Linear: bias size mismatch");
  }
  std::vector<T> y(static_cast<size_t>(rows) * out);
  {
    auto Y = MutMap<T>(y.data(), rows, out);
    Y.noalias() = AsMat(x.value(), rows, in) *
                  AsMat(weight.value(), out, in).transpose();
    if (bias) Y.rowwise() += ConstVec<T>(bias->value().data(), out).transpose();
  }
  std::vector<Tensor<T>> parents = {x, weight};
  if (bias) parents.push_back(*bias);
  const int xid = x.id(), wid = weight.id(), bid = bias ? bias->id() : -1;
  return g->AddNode(
      RowsCols(x, out), std::move(y), parents,
      [=](Graph<T>& g, int self) {
        auto dY = AsMat<T>(std::span<const T>(g.grad(self)), rows, out);
        if (g.requires_grad(xid)) {
          AsMat(g.grad(xid), rows, in).noalias() +=
              dY * AsMat(g.value(wid), out, in);
        }
        if (g.requires_grad(wid)) {
          AsMat(g.grad(wid), out, in).noalias() +=
              dY.transpose() * AsMat(g.value(xid), rows, in);
        }
        if (bid >= 0 && g.requires_grad(bid)) {
          MutVec<T>(g.grad(bid).data(), out) += dY.colwise().sum().transpose();
        }
      });
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, const Tensor<T>& gamma,
                    const Tensor<T>& beta, double eps) {
  const int rows = x.rows();
  const int dim = x.cols();
  Require(dim >= 1, "LayerNorm: last dimension must be >= 1");
  Require(static_cast<int>(gamma.size()) == dim &&
              static_cast<int>(beta.size()) == dim,
          "LayerNorm: gamma/beta size mismatch");
  auto xv = x.value();
  auto gv = gamma.value();
  auto bv = beta.value();
  std::vector<T> y(xv.size());
  std::vector<T> xhat(xv.size());
  std::vector<T> inv_std(rows);
  for (int r = 0; r < rows; ++r) {
    const T* xr = xv.data() + static_cast<size_t>(r) * dim;
    double mean = 0.0;
    for (int i = 0; i < dim; ++i) mean += xr[i];
    mean /= dim;
    double var = 0.0;
    for (int i = 0; i < dim; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= dim;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = static_cast<T>(is);
    for (int i = 0; i < dim; ++i) {
      const size_t k = static_cast<size_t>(r) * dim + i;
      xhat[k] = static_cast<T>((xr[i] - mean) * is);
      y[k] = xhat[k] * gv[i] + bv[i];
    }
  }
  const int xid = x.id(), gid = gamma.id(), bid = beta.id();
  return x.graph()->AddNode(
      x.shape(), std::move(y), {x, gamma, beta},
      [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph<T>& g,
                                                                int self) {
        auto dy = g.grad(self);
        auto gv = g.value(gid);
        const bool need_x = g.requires_grad(xid);
        std::span<T> dx = need_x ? g.grad(xid) : std::span<T>();
        std::span<T> dg = g.requires_grad(gid) ? g.grad(gid) : std::span<T>();
        std::span<T> db = g.requires_grad(bid) ? g.grad(bid) : std::span<T>();
        std::vector<T> dxhat(dim);
        for (int r = 0; r < rows; ++r) {
          const size_t base = static_cast<size_t>(r) * dim;
          double mean_d = 0.0, mean_dx = 0.0;
          for (int i = 0; i < dim; ++i) {
            const T d = dy[base + i];
            if (!dg.empty()) dg[i] += d * xhat[base + i];
            if (!db.empty()) db[i] += d;
            dxhat[i] = d * gv[i];
            mean_d += dxhat[i];
            mean_dx += dxhat[i] * xhat[base + i];
          }
          if (!need_x) continue;
          mean_d /= dim;
          mean_dx /= dim;
          for (int i = 0; i < dim; ++i) {
            dx[base + i] += static_cast<T>(
                inv_std[r] * (dxhat[i] - mean_d - xhat[base + i] * mean_dx));
          }
        }
      });
}

template <typename T>
Tensor<T> PRelu(const Tensor<T>& x, const Tensor<T>& alpha) {
  const int dim = x.cols();
  const int rows = x.rows();
  Require(static_cast<int>(alpha.size()) == dim || alpha.size() == 1,
          "PRelu: alpha must have one slope per column (or a single slope)");
  const bool shared = alpha.size() == 1 && dim != 1;
  auto xv = x.value();
  auto av = alpha.value();
  std::vector<T> y(xv.size());
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < dim; ++i) {
      const size_t k = static_cast<size_t>(r) * dim + i;
      const T a = av[shared ? 0 : i];
      y[k] = xv[k] >= T(0) ? xv[k] : a * xv[k];
    }
  }
  const int xid = x.id(), aid = alpha.id();
  return x.graph()->AddNode(
      x.shape(), std::move(y), {x, alpha}, [=](Graph<T>& g, int self) {
        auto dy = g.grad(self);
        auto xv = g.value(xid);
        auto av = g.value(aid);
        std::span<T> dx = g.requires_grad(xid) ? g.grad(xid) : std::span<T>();
        std::span<T> da = g.requires_grad(aid) ? g.grad(aid) : std::span<T>();
        for (int r = 0; r < rows; ++r) {
          for (int i = 0; i < dim; ++i) {
            const size_t k = static_cast<size_t>(r) * dim + i;
            const int ai = shared ? 0 : i;
            if (xv[k] >= T(0)) {
              if (!dx.empty()) dx[k] += dy[k];
            } else {
              if (!dx.empty()) dx[k] += av[ai] * dy[k];
              if (!da.empty()) da[ai] += xv[k] * dy[k];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> Lstm(const Tensor<T>& x, const Tensor<T>& w_ih,
               const Tensor<T>& w_hh, const Tensor<T>& bias,
               const LstmState<T>& initial, LstmState<T>* final_state) {
  const int steps = x.rows();
  const int in = x.cols();
  Require(w_hh.shape().size() == 2, "Lstm: w_hh must be 2-D");
  const int hidden = w_hh.shape()[1];
  const int gates = 4 * hidden;
  Require(w_hh.shape()[0] == gates, "Lstm: w_hh must be [4H x H]");
  Require(w_ih.shape().size() == 2 && w_ih.shape()[0] == gates &&
              w_ih.shape()[1] == in,
          "Lstm: w_ih must be [4H x in], got " + ShapeToString(w_ih.shape()));
  Require(static_cast<int>(bias.size()) == gates, "Lstm: bias must be [4H]");
  Require(static_cast<int>(initial.h.size()) == hidden &&
              static_cast<int>(initial.c.size()) == hidden,
          "Lstm: state size does not match hidden size " +
              std::to_string(hidden));

  // Pre-activations for all steps: [T x 4H]; after the loop this holds the
  // activated gate values (i, f, g, o).
  std::vector<T> act(static_cast<size_t>(steps) * gates);
  auto A = MutMap<T>(act.data(), steps, gates);
  A.noalias() = AsMat(x.value(), steps, in) *
                AsMat(w_ih.value(), gates, in).transpose();
  A.rowwise() += ConstVec<T>(bias.value().data(), gates).transpose();

  std::vector<T> h_all(static_cast<size_t>(steps) * hidden);
  std::vector<T> c_all(static_cast<size_t>(steps) * hidden);
  const auto Whh = AsMat(w_hh.value(), gates, hidden);
  Eigen::Matrix<T, Eigen::Dynamic, 1> h_prev =
      ConstVec<T>(initial.h.data(), hidden);
  Eigen::Matrix<T, Eigen::Dynamic, 1> c_prev =
      ConstVec<T>(initial.c.data(), hidden);
  Eigen::Matrix<T, Eigen::Dynamic, 1> pre(gates);
  for (int t = 0; t < steps; ++t) {
    T* a = act.data() + static_cast<size_t>(t) * gates;
    pre.noalias() = Whh * h_prev;
    T* h = h_all.data() + static_cast<size_t>(t) * hidden;
    T* c = c_all.data() + static_cast<size_t>(t) * hidden;
    for (int j = 0; j < hidden; ++j) {
      const T ig = Sigmoid(a[j] + pre[j]);
      const T fg = Sigmoid(a[hidden + j] + pre[hidden + j]);
      const T gg = std::tanh(a[2 * hidden + j] + pre[2 * hidden + j]);
      const T og = Sigmoid(a[3 * hidden + j] + pre[3 * hidden + j]);
      a[j] = ig;
      a[hidden + j] = fg;
      a[2 * hidden + j] = gg;
      a[3 * hidden + j] = og;
      c[j] = fg * c_prev[j] + ig * gg;
      h[j] = og * std::tanh(c[j]);
    }
    h_prev = ConstVec<T>(h, hidden);
    c_prev = ConstVec<T>(c, hidden);
  }
  if (final_state) {
    final_state->h.assign(h_prev.data(), h_prev.data() + hidden);
    final_state->c.assign(c_prev.data(), c_prev.data() + hidden);
  }

  std::vector<T> output = h_all;
  const int xid = x.id(), iid = w_ih.id(), hid = w_hh.id(), bid = bias.id();
  return x.graph()->AddNode(
      {steps, hidden}, std::move(output), {x, w_ih, w_hh, bias},
      [=, act = std::move(act), h_all = std::move(h_all),
       c_all = std::move(c_all), h0 = initial.h,
       c0 = initial.c](Graph<T>& g, int self) {
        auto dY = g.grad(self);
        const auto Whh = AsMat(g.value(hid), gates, hidden);
        RowMat<T> dG(steps, gates);
        Eigen::Matrix<T, Eigen::Dynamic, 1> dh_next =
            Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(hidden);
        Eigen::Matrix<T, Eigen::Dynamic, 1> dc_next =
            Eigen::Matrix<T, Eigen::Dynamic, 1>::Zero(hidden);
        for (int t = steps - 1; t >= 0; --t) {
          const T* a = act.data() + static_cast<size_t>(t) * gates;
          const T* c = c_all.data() + static_cast<size_t>(t) * hidden;
          const T* c_prev =
              t > 0 ? c_all.data() + static_cast<size_t>(t - 1) * hidden
                    : c0.data();
          T* dg = dG.data() + static_cast<size_t>(t) * gates;
          for (int j = 0; j < hidden; ++j) {
            const T ig = a[j], fg = a[hidden + j], gg = a[2 * hidden + j],
                    og = a[3 * hidden + j];
            const T tc = std::tanh(c[j]);
            const T dh = dY[static_cast<size_t>(t) * hidden + j] + dh_next[j];
            const T dc = dh * og * (T(1) - tc * tc) + dc_next[j];
            dg[j] = dc * gg * ig * (T(1) - ig);
            dg[hidden + j] = dc * c_prev[j] * fg * (T(1) - fg);
            dg[2 * hidden + j] = dc * ig * (T(1) - gg * gg);
            dg[3 * hidden + j] = dh * tc * og * (T(1) - og);
            dc_next[j] = dc * fg;
          }
          dh_next.noalias() =
              Whh.transpose() * ConstVec<T>(dg, gates);
        }
        if (g.requires_grad(xid)) {
          AsMat(g.grad(xid), steps, in).noalias() +=
              dG * AsMat(g.value(iid), gates, in);
        }
        if (g.requires_grad(iid)) {
          AsMat(g.grad(iid), gates, in).noalias() +=
              dG.transpose() * AsMat(g.value(xid), steps, in);
        }
        if (g.requires_grad(hid)) {
          // Row t of the previous-hidden matrix is h_{t-1}.
          RowMat<T> h_prev(steps, hidden);
          for (int j = 0; j < hidden; ++j) h_prev(0, j) = h0[j];
          if (steps > 1) {
            h_prev.bottomRows(steps - 1) =
                AsMat(std::span<const T>(h_all), steps, hidden)
                    .topRows(steps - 1);
          }
          AsMat(g.grad(hid), gates, hidden).noalias() +=
              dG.transpose() * h_prev;
        }
        if (g.requires_grad(bid)) {
          MutVec<T>(g.grad(bid).data(), gates) += dG.colwise().sum().transpose();
        }
      });
}

namespace {

template <typename T>
void RequireSameShape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  Require(a.graph() == b.graph(), std::string(op) + ": tensors from different graphs");
  Require(a.size() == b.size() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + ShapeToString(a.shape()) +
              " vs " + ShapeToString(b.shape()));
}

}  // namespace

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Add");
  auto av = a.value(), bv = b.value();
  std::vector<T> y(av.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  const int aid = a.id(), bid = b.id();
  return a.graph()->AddNode(a.shape(), std::move(y), {a, b},
                            [=](Graph<T>& g, int self) {
                              auto dy = g.grad(self);
                              for (int id : {aid, bid}) {
                                if (!g.requires_grad(id)) continue;
                                auto d = g.grad(id);
                                for (size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
                              }
                            });
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Sub");
  auto av = a.value(), bv = b.value();
  std::vector<T> y(av.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] - bv[i];
  const int aid = a.id(), bid = b.id();
  return a.graph()->AddNode(a.shape(), std::move(y), {a, b},
                            [=](Graph<T>& g, int self) {
                              auto dy = g.grad(self);
                              if (g.requires_grad(aid)) {
                                auto d = g.grad(aid);
                                for (size_t i = 0; i < d.size(); ++i) d[i] += dy[i];
                              }
                              if (g.requires_grad(bid)) {
                                auto d = g.grad(bid);
                                for (size_t i = 0; i < d.size(); ++i) d[i] -= dy[i];
                              }
                            });
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  RequireSameShape(a, b, "Mul");
  auto av = a.value(), bv = b.value();
  std::vector<T> y(av.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const int aid = a.id(), bid = b.id();
  return a.graph()->AddNode(
      a.shape(), std::move(y), {a, b}, [=](Graph<T>& g, int self) {
        auto dy = g.grad(self);
        auto av = g.value(aid), bv = g.value(bid);
        if (g.requires_grad(aid)) {
          auto d = g.grad(aid);
          for (size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * bv[i];
        }
        if (g.requires_grad(bid)) {
          auto d = g.grad(bid);
          for (size_t i = 0; i < d.size(); ++i) d[i] += dy[i] * av[i];
        }
      });
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& x, double factor) {
  auto xv = x.value();
  const T f = static_cast<T>(factor);
  std::vector<T> y(xv.size());
  for (size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * f;
  const int xid = x.id();
  return x.graph()->AddNode(x.shape(), std::move(y), {x},
                            [=](Graph<T>& g, int self) {
                              auto dy = g.grad(self);
                              auto d = g.grad(xid);
                              for (size_t i = 0; i < d.size(); ++i) d[i] += f * dy[i];
                            });
}

template <typename T>
Tensor<T> ConcatCols(const std::vector<Tensor<T>>& parts) {
  Require(!parts.empty(), "ConcatCols: no inputs");
  const int rows = parts[0].rows();
  std::vector<int> widths;
  int total = 0;
  for (const auto& p : parts) {
    Require(p.rows() == rows, "ConcatCols: row count mismatch");
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<T> y(static_cast<size_t>(rows) * total);
  int offset = 0;
  for (size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].value();
    for (int r = 0; r < rows; ++r) {
      std::copy_n(v.data() + static_cast<size_t>(r) * widths[k], widths[k],
                  y.data() + static_cast<size_t>(r) * total + offset);
    }
    offset += widths[k];
  }
  std::vector<int> ids;
  for (const auto& p : parts) ids.push_back(p.id());
  return parts[0].graph()->AddNode(
      RowsCols(parts[0], total), std::move(y), parts,
      [=](Graph<T>& g, int self) {
        auto dy = g.grad(self);
        int offset = 0;
        for (size_t k = 0; k < ids.size(); ++k) {
          if (g.requires_grad(ids[k])) {
            auto d = g.grad(ids[k]);
            for (int r = 0; r < rows; ++r) {
              const T* src = dy.data() + static_cast<size_t>(r) * total + offset;
              T* dst = d.data() + static_cast<size_t>(r) * widths[k];
              for (int i = 0; i < widths[k]; ++i) dst[i] += src[i];
            }
          }
          offset += widths[k];
        }
      });
}

template <typename T>
Tensor<T> SliceCols(const Tensor<T>& x, int begin, int count) {
  const int rows = x.rows(), cols = x.cols();
  Require(begin >= 0 && count >= 0 && begin + count <= cols,
          "SliceCols: range out of bounds");
  auto xv = x.value();
  std::vector<T> y(static_cast<size_t>(rows) * count);
  for (int r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + static_cast<size_t>(r) * cols + begin, count,
                y.data() + static_cast<size_t>(r) * count);
  }
  const int xid = x.id();
  return x.graph()->AddNode(
      RowsCols(x, count), std::move(y), {x}, [=](Graph<T>& g, int self) {
        auto dy = g.grad(self);
        auto d = g.grad(xid);
        for (int r = 0; r < rows; ++r) {
          for (int i = 0; i < count; ++i) {
            d[static_cast<size_t>(r) * cols + begin + i] +=
                dy[static_cast<size_t>(r) * count + i];
          }
        }
      });
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& x) {
  double s = 0.0;
  for (T v : x.value()) s += v;
  const int xid = x.id();
  return x.graph()->AddNode({1}, {static_cast<T>(s)}, {x},
                            [=](Graph<T>& g, int self) {
                              const T dy = g.grad(self)[0];
                              for (T& d : g.grad(xid)) d += dy;
                            });
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& x) {
  Require(x.size() > 0, "Mean: empty tensor");
  return Scale(Sum(x), 1.0 / static_cast<double>(x.size()));
}

template <typename T>
Tensor<T> OneHotLinear(std::span<const int> indices, int depth,
                       const Tensor<T>& weight, const Tensor<T>* bias) {
  Require(weight.shape().size() == 2 && weight.shape()[1] == depth,
          "OneHotLinear: weight must be [out x depth]");
  const int out = weight.shape()[0];
  if (bias) {
    Require(static_cast<int>(bias->size()) == out,
            "OneHotLinear: bias size mismatch");
  }
  const int rows = static_cast<int>(indices.size());
  for (int idx : indices) {
    Require(idx >= 0 && idx < depth, "OneHotLinear: index out of range");
  }
  auto wv = weight.value();
  std::vector<T> y(static_cast<size_t>(rows) * out);
  for (int r = 0; r < rows; ++r) {
    for (int o = 0; o < out; ++o) {
      y[static_cast<size_t>(r) * out + o] =
          wv[static_cast<size_t>(o) * depth + indices[r]] +
          (bias ? bias->value()[o] : T(0));
    }
  }
  std::vector<Tensor<T>> parents = {weight};
  if (bias) parents.push_back(*bias);
  const int wid = weight.id(), bid = bias ? bias->id() : -1;
  std::vector<int> idx(indices.begin(), indices.end());
  return weight.graph()->AddNode(
      {rows, out}, std::move(y), parents,
      [=, idx = std::move(idx)](Graph<T>& g, int self) {
        auto dy = g.grad(self);
        if (g.requires_grad(wid)) {
          auto dw = g.grad(wid);
          for (int r = 0; r < rows; ++r) {
            for (int o = 0; o < out; ++o) {
              dw[static_cast<size_t>(o) * depth + idx[r]] +=
                  dy[static_cast<size_t>(r) * out + o];
            }
          }
        }
        if (bid >= 0 && g.requires_grad(bid)) {
          auto db = g.grad(bid);
          for (int r = 0; r < rows; ++r) {
            for (int o = 0; o < out; ++o) {
              db[o] += dy[static_cast<size_t>(r) * out + o];
            }
          }
        }
      });
}

template <typename T>
std::vector<T> OneHotRows(std::span<const int> indices, int depth) {
  std::vector<T> m(indices.size() * static_cast<size_t>(depth), T(0));
  for (size_t r = 0; r < indices.size(); ++r) {
    Require(indices[r] >= 0 && indices[r] < depth,
            "OneHotRows: index out of range");
    m[r * depth + indices[r]] = T(1);
  }
  return m;
}

template <typename T>
Tensor<T> OverlapAdd(const Tensor<T>& frames, int shift,
                     std::span<const double> window,
                     std::span<const T> carry) {
  const int num_frames = frames.rows();
  const int frame_len = frames.cols();
  Require(shift >= 1 && frame_len >= shift, "OverlapAdd: need 1 <= R <= oW");
  Require(static_cast<int>(window.size()) == frame_len,
          "OverlapAdd: window length != frame length");
  Require(static_cast<int>(carry.size()) == frame_len - shift,
          "OverlapAdd: carry must hold oW - R samples");
  const int length = num_frames * shift + frame_len - shift;
  std::vector<T> y(static_cast<size_t>(length), T(0));
  std::copy(carry.begin(), carry.end(), y.begin());
  dsp::OverlapAddInto<T>(frames.value(), num_frames, frame_len, shift, window,
                         y);
  std::vector<double> win(window.begin(), window.end());
  const int fid = frames.id();
  return frames.graph()->AddNode(
      {1, length}, std::move(y), {frames},
      [=, win = std::move(win)](Graph<T>& g, int self) {
        std::span<const T> dy = g.grad(self);
        dsp::FrameFromBuffer<T>(dy, num_frames, frame_len, shift, win,
                                g.grad(fid));
      });
}

#define DRN_INSTANTIATE_OPS(T)                                                \
  template Tensor<T> Linear(const Tensor<T>&, const Tensor<T>&,               \
                            const Tensor<T>*);                                \
  template Tensor<T> LayerNorm(const Tensor<T>&, const Tensor<T>&,            \
                               const Tensor<T>&, double);                     \
  template Tensor<T> PRelu(const Tensor<T>&, const Tensor<T>&);               \
  template Tensor<T> Lstm(const Tensor<T>&, const Tensor<T>&,                 \
                          const Tensor<T>&, const Tensor<T>&,                 \
                          const LstmState<T>&, LstmState<T>*);                \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Sub(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Scale(const Tensor<T>&, double);                         \
  template Tensor<T> ConcatCols(const std::vector<Tensor<T>>&);               \
  template Tensor<T> SliceCols(const Tensor<T>&, int, int);                   \
  template Tensor<T> Sum(const Tensor<T>&);                                   \
  template Tensor<T> Mean(const Tensor<T>&);                                  \
  template Tensor<T> OneHotLinear(std::span<const int>, int, const Tensor<T>&, \
                                  const Tensor<T>*);                          \
  template std::vector<T> OneHotRows(std::span<const int>, int);              \
  template Tensor<T> OverlapAdd(const Tensor<T>&, int,                        \
                                std::span<const double>, std::span<const T>);

DRN_INSTANTIATE_OPS(float)
DRN_INSTANTIATE_OPS(double)

#undef DRN_INSTANTIATE_OPS

}  // namespace drn::ad
