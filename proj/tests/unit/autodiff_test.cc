#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "drn/ad/checkpoint.h"
#include "drn/ad/gradcheck.h"
#include "drn/ad/ops.h"
#include "drn/ad/tensor.h"
#include "drn/util/rng.h"

namespace drn::ad {
namespace {

using G = Graph<double>;
using Tn = Tensor<double>;

std::vector<double> Random(size_t n, uint64_t seed, double lo = -1.0,
                           double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.Uniform(lo, hi);
  return v;
}

// Weighted sum with fixed pseudo-random weights so every output element
// contributes a distinct gradient.
Tn Project(G& g, const Tn& y, uint64_t seed = 77) {
  auto w = g.Constant(y.shape(), Random(y.size(), seed));
  return Sum(Mul(y, w));
}

TEST(TensorTest, ParameterSetBasics) {
  ParameterSet<double> ps;
  ps.Add("a", {2, 3});
  ps.Add("b", {4});
  EXPECT_EQ(ps.count(), 2);
  EXPECT_EQ(ps.TotalElements(), 10u);
  EXPECT_THROW(ps.Add("a", {1}), std::invalid_argument);
  EXPECT_THROW(ps.Get("zz"), std::out_of_range);
  ps.Get("b").grad() = {3, 4, 0, 0};
  EXPECT_DOUBLE_EQ(ps.GradNorm(), 5.0);
  ps.ScaleGrad(0.5);
  EXPECT_DOUBLE_EQ(ps.GradNorm(), 2.5);
  ps.ZeroGrad();
  EXPECT_EQ(ps.GradNorm(), 0.0);
}

TEST(BackwardTest, SumGivesOnes) {
  G g;
  auto x = g.Variable({2, 3}, {1, 2, 3, 4, 5, 6});
  g.Backward(Sum(x));
  for (double v : x.grad()) EXPECT_EQ(v, 1.0);
}

TEST(BackwardTest, SumOfSquaresGivesTwoX) {
  G g;
  std::vector<double> v = {1, -2, 3.5};
  auto x = g.Variable({3}, v);
  g.Backward(Sum(Mul(x, x)));
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2 * v[i]);
}

TEST(BackwardTest, NonScalarLossThrows) {
  G g;
  auto x = g.Variable({2}, {1, 2});
  EXPECT_THROW(g.Backward(x), std::invalid_argument);
}

TEST(BackwardTest, AccumulatesOverUses) {
  G g;
  auto x = g.Variable({1}, {3.0});
  g.Backward(Sum(Add(Scale(x, 2.0), Mul(x, x))));
  EXPECT_DOUBLE_EQ(x.grad()[0], 2.0 + 6.0);
}

TEST(LinearTest, IdentityAndHandExample) {
  G g;
  auto x = g.Constant({1, 2}, {1, 2});
  auto y = Linear(x, g.Constant({2, 2}, {1, 0, 0, 1}));
  EXPECT_EQ(y.value()[0], 1.0);
  EXPECT_EQ(y.value()[1], 2.0);
  auto b = g.Constant({2}, {0, 1});
  auto z = Linear(x, g.Constant({2, 2}, {1, 1, 0, 1}), b);
  EXPECT_EQ(z.value()[0], 3.0);
  EXPECT_EQ(z.value()[1], 3.0);
}

TEST(LinearTest, ShapeMismatchThrows) {
  G g;
  auto x = g.Constant({1, 3}, {1, 2, 3});
  EXPECT_THROW(Linear(x, g.Constant({2, 2}, {1, 0, 0, 1})),
               std::invalid_argument);
}

TEST(LinearTest, Gradcheck) {
  ParameterSet<double> ps;
  ps.Add("w", {3, 4}).value() = Random(12, 1);
  ps.Add("b", {3}).value() = Random(3, 2);
  const auto xv = Random(20, 3);
  auto report = CheckParameterGradients(ps, [&](G& g) {
    auto x = g.Constant({5, 4}, xv);
    auto b = g.Param(ps.Get("b"));
    return Project(g, Linear(x, g.Param(ps.Get("w")), &b));
  });
  EXPECT_TRUE(report.Passed(1e-4)) << report.worst.name;
  auto in = CheckInputGradients(xv, [&](G& g, const std::vector<double>& v,
                                        Tn* out) {
    *out = g.Variable({5, 4}, v);
    auto b = g.Param(ps.Get("b"));
    return Project(g, Linear(*out, g.Param(ps.Get("w")), &b));
  });
  EXPECT_TRUE(in.Passed(1e-4));
}

TEST(LayerNormTest, ClosedForms) {
  G g;
  auto gamma = g.Constant({2}, {1, 1});
  auto beta = g.Constant({2}, {0, 0});
  auto y = LayerNorm(g.Constant({1, 2}, {1, -1}), gamma, beta, 1e-5);
  EXPECT_NEAR(y.value()[0], 1.0 / std::sqrt(1.0 + 1e-5), 1e-12);
  EXPECT_NEAR(y.value()[1], -1.0 / std::sqrt(1.0 + 1e-5), 1e-12);
  auto c = LayerNorm(g.Constant({1, 2}, {3, 3}), gamma, beta);
  EXPECT_EQ(c.value()[0], 0.0);
  EXPECT_EQ(c.value()[1], 0.0);
  EXPECT_THROW(LayerNorm(g.Constant({1, 0}, {}), g.Constant({0}, {}),
                         g.Constant({0}, {})),
               std::invalid_argument);
}

TEST(LayerNormTest, Gradcheck) {
  ParameterSet<double> ps;
  ps.Add("gamma", {6}).value() = Random(6, 4, 0.5, 1.5);
  ps.Add("beta", {6}).value() = Random(6, 5);
  const auto xv = Random(18, 6, -2, 2);
  auto report = CheckParameterGradients(ps, [&](G& g) {
    auto x = g.Constant({3, 6}, xv);
    return Project(g, LayerNorm(x, g.Param(ps.Get("gamma")),
                                g.Param(ps.Get("beta"))));
  });
  EXPECT_TRUE(report.Passed(1e-4)) << report.max_rel_error;
  auto in = CheckInputGradients(xv, [&](G& g, const std::vector<double>& v,
                                        Tn* out) {
    *out = g.Variable({3, 6}, v);
    return Project(g, LayerNorm(*out, g.Param(ps.Get("gamma")),
                                g.Param(ps.Get("beta"))));
  });
  EXPECT_TRUE(in.Passed(1e-4)) << in.max_rel_error;
}

TEST(PReluTest, Definition) {
  G g;
  auto y = PRelu(g.Constant({1, 3}, {1, -1, 0}), g.Constant({3}, {0.25, 0.25, 0.25}));
  EXPECT_EQ(y.value()[0], 1.0);
  EXPECT_EQ(y.value()[1], -0.25);
  EXPECT_EQ(y.value()[2], 0.0);
}

TEST(PReluTest, Gradcheck) {
  ParameterSet<double> ps;
  ps.Add("alpha", {4}).value() = {0.1, 0.25, 0.5, -0.2};
  // Keep inputs away from the kink.
  auto xv = Random(12, 7, 0.1, 1.0);
  for (size_t i = 0; i < xv.size(); i += 2) xv[i] = -xv[i];
  auto report = CheckParameterGradients(ps, [&](G& g) {
    return Project(g, PRelu(g.Constant({3, 4}, xv), g.Param(ps.Get("alpha"))));
  });
  EXPECT_TRUE(report.Passed(1e-4));
  auto in = CheckInputGradients(xv, [&](G& g, const std::vector<double>& v,
                                        Tn* out) {
    *out = g.Variable({3, 4}, v);
    return Project(g, PRelu(*out, g.Param(ps.Get("alpha"))));
  });
  EXPECT_TRUE(in.Passed(1e-4));
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(LstmTest, ZeroWeightsGiveZeroOutput) {
  G g;
  auto x = g.Constant({5, 3}, Random(15, 8));
  auto y = Lstm(x, g.Constant({8, 3}, std::vector<double>(24, 0.0)),
                g.Constant({8, 2}, std::vector<double>(16, 0.0)),
                g.Constant({8}, std::vector<double>(8, 0.0)),
                LstmState<double>::Zeros(2));
  for (double v : y.value()) EXPECT_EQ(v, 0.0);
}

TEST(LstmTest, SingleUnitHandComputation) {
  // Gate order i, f, g, o.
  const double wi[4] = {0.5, -0.3, 0.8, 0.1};
  const double wh[4] = {0.2, 0.4, -0.6, 0.7};
  const double b[4] = {0.1, 1.0, -0.2, 0.05};
  const double x = 0.9, h0 = -0.4, c0 = 0.3;
  const double i = Sigmoid(wi[0] * x + wh[0] * h0 + b[0]);
  const double f = Sigmoid(wi[1] * x + wh[1] * h0 + b[1]);
  const double gg = std::tanh(wi[2] * x + wh[2] * h0 + b[2]);
  const double o = Sigmoid(wi[3] * x + wh[3] * h0 + b[3]);
  const double c1 = f * c0 + i * gg;
  const double h1 = o * std::tanh(c1);

  G g;
  LstmState<double> init{{h0}, {c0}}, fin;
  auto y = Lstm(g.Constant({1, 1}, {x}), g.Constant({4, 1}, {wi, wi + 4}),
                g.Constant({4, 1}, {wh, wh + 4}), g.Constant({4}, {b, b + 4}),
                init, &fin);
  EXPECT_NEAR(y.value()[0], h1, 1e-12);
  EXPECT_NEAR(fin.h[0], h1, 1e-12);
  EXPECT_NEAR(fin.c[0], c1, 1e-12);
}

TEST(LstmTest, StateShapeMismatchThrows) {
  G g;
  auto x = g.Constant({2, 1}, {1, 2});
  EXPECT_THROW(Lstm(x, g.Constant({8, 1}, std::vector<double>(8, 0.1)),
                    g.Constant({8, 2}, std::vector<double>(16, 0.1)),
                    g.Constant({8}, std::vector<double>(8, 0.0)),
                    LstmState<double>::Zeros(3)),
               std::invalid_argument);
}

TEST(LstmTest, Causality) {
  const int T = 6, in = 3, H = 4;
  auto wih = Random(4 * H * in, 9), whh = Random(4 * H * H, 10),
       b = Random(4 * H, 11);
  auto xv = Random(T * in, 12);
  auto run = [&](const std::vector<double>& xs) {
    G g;
    auto y = Lstm(g.Constant({T, in}, xs), g.Constant({4 * H, in}, wih),
                  g.Constant({4 * H, H}, whh), g.Constant({4 * H}, b),
                  LstmState<double>::Zeros(H));
    return std::vector<double>(y.value().begin(), y.value().end());
  };
  const auto base = run(xv);
  for (int t = 0; t < T; ++t) {
    auto xp = xv;
    for (int k = 0; k < in; ++k) xp[t * in + k] += 0.5;
    const auto p = run(xp);
    for (int s = 0; s < t; ++s) {
      for (int k = 0; k < H; ++k) EXPECT_EQ(p[s * H + k], base[s * H + k]);
    }
  }
}

TEST(LstmTest, Gradcheck) {
  const int T = 4, in = 3, H = 3;
  ParameterSet<double> ps;
  ps.Add("w_ih", {4 * H, in}).value() = Random(4 * H * in, 13);
  ps.Add("w_hh", {4 * H, H}).value() = Random(4 * H * H, 14);
  ps.Add("bias", {4 * H}).value() = Random(4 * H, 15);
  const auto xv = Random(T * in, 16);
  LstmState<double> init{Random(H, 17), Random(H, 18)};
  auto build = [&](G& g, const Tn& x) {
    return Project(g, Lstm(x, g.Param(ps.Get("w_ih")), g.Param(ps.Get("w_hh")),
                           g.Param(ps.Get("bias")), init));
  };
  auto report = CheckParameterGradients(
      ps, [&](G& g) { return build(g, g.Constant({T, in}, xv)); });
  EXPECT_TRUE(report.Passed(1e-4)) << report.worst.name << " "
                                   << report.max_rel_error;
  auto inr = CheckInputGradients(xv, [&](G& g, const std::vector<double>& v,
                                         Tn* out) {
    *out = g.Variable({T, in}, v);
    return build(g, *out);
  });
  EXPECT_TRUE(inr.Passed(1e-4)) << inr.max_rel_error;
}

TEST(ElementwiseTest, Gradcheck) {
  const auto av = Random(6, 19), bv = Random(6, 20), cv = Random(4, 21);
  auto inr = CheckInputGradients(av, [&](G& g, const std::vector<double>& v,
                                         Tn* out) {
    *out = g.Variable({2, 3}, v);
    auto b = g.Constant({2, 3}, bv);
    auto y = Sub(Mul(*out, b), Scale(Add(*out, Mul(*out, *out)), 0.3));
    auto cat = ConcatCols<double>({y, g.Constant({2, 2}, cv), *out});
    return Add(Project(g, SliceCols(cat, 1, 6)), Mean(Mul(*out, *out)));
  });
  EXPECT_TRUE(inr.Passed(1e-4)) << inr.max_rel_error;
}

TEST(ElementwiseTest, ConcatAndSliceValues) {
  G g;
  auto a = g.Constant({2, 1}, {1, 2});
  auto b = g.Constant({2, 2}, {3, 4, 5, 6});
  auto c = ConcatCols<double>({a, b});
  const std::vector<double> want = {1, 3, 4, 2, 5, 6};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(c.value()[i], want[i]);
  auto s = SliceCols(c, 1, 1);
  EXPECT_EQ(s.value()[0], 3.0);
  EXPECT_EQ(s.value()[1], 5.0);
  EXPECT_THROW(Add(a, b), std::invalid_argument);
}

TEST(OneHotTest, EqualsDenseMatmul) {
  const int depth = 7, out = 5;
  const std::vector<int> idx = {0, 3, 6, 3, 1};
  const auto wv = Random(out * depth, 22), bv = Random(out, 23);
  G g;
  auto w = g.Variable({out, depth}, wv);
  auto b = g.Variable({out}, bv);
  auto sparse = OneHotLinear<double>(idx, depth, w, &b);
  auto dense = Linear(g.Constant({5, depth}, OneHotRows<double>(idx, depth)),
                      w, &b);
  for (size_t i = 0; i < sparse.size(); ++i) {
    EXPECT_NEAR(sparse.value()[i], dense.value()[i], 1e-12);
  }
  EXPECT_THROW(OneHotLinear<double>(std::vector<int>{7}, depth, w, &b),
               std::invalid_argument);
}

TEST(OneHotTest, Gradcheck) {
  ParameterSet<double> ps;
  ps.Add("w", {4, 6}).value() = Random(24, 24);
  ps.Add("b", {4}).value() = Random(4, 25);
  const std::vector<int> idx = {5, 0, 2, 2};
  auto report = CheckParameterGradients(ps, [&](G& g) {
    auto b = g.Param(ps.Get("b"));
    return Project(g, OneHotLinear<double>(idx, 6, g.Param(ps.Get("w")), &b));
  });
  EXPECT_TRUE(report.Passed(1e-4));
}

TEST(OverlapAddOpTest, ValuesAndGradcheck) {
  const int T = 4, oW = 6, R = 3;
  const std::vector<double> win = {0.1, 0.5, 0.9, 0.9, 0.5, 0.1};
  const std::vector<double> carry = {0.3, -0.2, 0.7};
  const auto fv = Random(T * oW, 26);
  {
    G g;
    auto y = OverlapAdd<double>(g.Constant({T, oW}, fv), R, win, carry);
    ASSERT_EQ(y.cols(), T * R + oW - R);
    std::vector<double> want(T * R + oW - R, 0.0);
    for (int i = 0; i < 3; ++i) want[i] = carry[i];
    for (int t = 0; t < T; ++t) {
      for (int i = 0; i < oW; ++i) want[t * R + i] += win[i] * fv[t * oW + i];
    }
    for (size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(y.value()[i], want[i], 1e-14);
    }
  }
  auto inr = CheckInputGradients(fv, [&](G& g, const std::vector<double>& v,
                                         Tn* out) {
    *out = g.Variable({T, oW}, v);
    return Project(g, OverlapAdd<double>(*out, R, win, carry));
  });
  EXPECT_TRUE(inr.Passed(1e-4));
}

TEST(CheckpointTest, RoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "drn_ckpt_test.bin";
  ParameterSet<float> ps;
  ps.Add("layer.weight", {3, 2}).value() = {1, 2, 3, 4, 5, 6.5f};
  ps.Add("layer.bias", {3}).value() = {-1, 0, 1e-3f};
  SaveCheckpoint(path.string(), ps, {{"step", 12}});
  ParameterSet<float> other;
  other.Add("layer.weight", {3, 2});
  other.Add("layer.bias", {3});
  auto meta = LoadCheckpoint(path.string(), other);
  EXPECT_EQ(meta["step"], 12);
  EXPECT_EQ(other.Get("layer.weight").value(), ps.Get("layer.weight").value());
  EXPECT_EQ(other.Get("layer.bias").value(), ps.Get("layer.bias").value());
  ParameterSet<float> bad;
  bad.Add("layer.weight", {2, 3});
  bad.Add("layer.bias", {3});
  EXPECT_THROW(LoadCheckpoint(path.string(), bad), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(DeterminismTest, IdenticalLossesAcrossRuns) {
  auto run = [] {
    G g;
    auto x = g.Constant({3, 4}, Random(12, 30));
    auto w = g.Variable({5, 4}, Random(20, 31));
    auto y = Lstm(Linear(x, w), g.Constant({20, 5}, Random(100, 32)),
                  g.Constant({20, 5}, Random(100, 33)),
                  g.Constant({20}, Random(20, 34)),
                  LstmState<double>::Zeros(5));
    return Sum(Mul(y, y)).item();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace drn::ad
