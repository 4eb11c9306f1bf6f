#include "drn/train/gradcheck_suite.h"

#include "drn/ad/ops.h"
#include "drn/metrics/pcm_loss.h"
#include "drn/model/drn.h"
#include "drn/util/rng.h"

namespace drn::train {

namespace {

using G = ad::Graph<double>;
using Tn = ad::Tensor<double>;

std::vector<double> Random(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.Normal();
  return v;
}

Tn Project(G& g, const Tn& y) {
  return ad::Sum(ad::Mul(y, g.Constant(y.shape(), Random(y.size(), 77))));
}

ad::GradCheckReport Worse(ad::GradCheckReport a, const ad::GradCheckReport& b) {
  a.checked += b.checked;
  if (b.max_rel_error > a.max_rel_error) {
    a.max_rel_error = b.max_rel_error;
    a.worst = b.worst;
  }
  a.per_parameter.insert(a.per_parameter.end(), b.per_parameter.begin(),
                         b.per_parameter.end());
  return a;
}

}  // namespace

std::vector<NamedGradCheck> RunGradCheckSuite(double step) {
  std::vector<NamedGradCheck> out;

  {
    ad::ParameterSet<double> ps;
    ps.Add("w", {3, 4}).value() = Random(12, 1);
    ps.Add("b", {3}).value() = Random(3, 2);
    const auto xv = Random(20, 3);
    auto build = [&](G& g, const Tn& x) {
      auto b = g.Param(ps.Get("b"));
      return Project(g, ad::Linear(x, g.Param(ps.Get("w")), &b));
    };
    auto r = ad::CheckParameterGradients(
        ps, [&](G& g) { return build(g, g.Constant({5, 4}, xv)); }, step);
    r = Worse(r, ad::CheckInputGradients(xv, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({5, 4}, v);
      return build(g, *x);
    }, step));
    out.push_back({"linear", r});
  }

  {
    ad::ParameterSet<double> ps;
    ps.Add("gamma", {5}).value() = Random(5, 4);
    ps.Add("beta", {5}).value() = Random(5, 5);
    const auto xv = Random(15, 6);
    auto build = [&](G& g, const Tn& x) {
      return Project(g, ad::LayerNorm(x, g.Param(ps.Get("gamma")),
                                      g.Param(ps.Get("beta"))));
    };
    auto r = ad::CheckParameterGradients(
        ps, [&](G& g) { return build(g, g.Constant({3, 5}, xv)); }, step);
    r = Worse(r, ad::CheckInputGradients(xv, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({3, 5}, v);
      return build(g, *x);
    }, step));
    out.push_back({"layer_norm", r});
  }

  {
    ad::ParameterSet<double> ps;
    ps.Add("alpha", {4}).value() = {0.25, 0.1, -0.3, 0.5};
    auto xv = Random(12, 7);
    for (auto& x : xv) x += (x >= 0 ? 0.1 : -0.1);  // away from the kink
    auto build = [&](G& g, const Tn& x) {
      return Project(g, ad::PRelu(x, g.Param(ps.Get("alpha"))));
    };
    auto r = ad::CheckParameterGradients(
        ps, [&](G& g) { return build(g, g.Constant({3, 4}, xv)); }, step);
    r = Worse(r, ad::CheckInputGradients(xv, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({3, 4}, v);
      return build(g, *x);
    }, step));
    out.push_back({"prelu", r});
  }

  {
    const int T = 4, in = 3, H = 3;
    ad::ParameterSet<double> ps;
    ps.Add("w_ih", {4 * H, in}).value() = Random(4 * H * in, 13);
    ps.Add("w_hh", {4 * H, H}).value() = Random(4 * H * H, 14);
    ps.Add("bias", {4 * H}).value() = Random(4 * H, 15);
    const auto xv = Random(T * in, 16);
    const ad::LstmState<double> init{Random(H, 17), Random(H, 18)};
    auto build = [&](G& g, const Tn& x) {
      return Project(g, ad::Lstm(x, g.Param(ps.Get("w_ih")), g.Param(ps.Get("w_hh")),
                                 g.Param(ps.Get("bias")), init));
    };
    auto r = ad::CheckParameterGradients(
        ps, [&](G& g) { return build(g, g.Constant({T, in}, xv)); }, step);
    r = Worse(r, ad::CheckInputGradients(xv, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({T, in}, v);
      return build(g, *x);
    }, step));
    out.push_back({"lstm", r});
  }

  {
    const auto av = Random(6, 19), bv = Random(6, 20), cv = Random(4, 21);
    auto r = ad::CheckInputGradients(av, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({2, 3}, v);
      auto b = g.Constant({2, 3}, bv);
      auto y = ad::Sub(ad::Mul(*x, b), ad::Scale(ad::Add(*x, ad::Mul(*x, *x)), 0.3));
      auto cat = ad::ConcatCols<double>({y, g.Constant({2, 2}, cv), *x});
      return ad::Add(Project(g, ad::SliceCols(cat, 1, 6)), ad::Mean(ad::Mul(*x, *x)));
    }, step);
    out.push_back({"elementwise", r});
  }

  {
    ad::ParameterSet<double> ps;
    ps.Add("w", {4, 6}).value() = Random(24, 24);
    ps.Add("b", {4}).value() = Random(4, 25);
    const std::vector<int> idx = {5, 0, 2, 2};
    auto r = ad::CheckParameterGradients(ps, [&](G& g) {
      auto b = g.Param(ps.Get("b"));
      return Project(g, ad::OneHotLinear<double>(idx, 6, g.Param(ps.Get("w")), &b));
    }, step);
    out.push_back({"one_hot_linear", r});
  }

  {
    const int T = 4, oW = 6, R = 3;
    const std::vector<double> win = {0.1, 0.5, 0.9, 0.9, 0.5, 0.1};
    const std::vector<double> carry = {0.3, -0.2, 0.7};
    const auto fv = Random(T * oW, 26);
    auto r = ad::CheckInputGradients(fv, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({T, oW}, v);
      return Project(g, ad::OverlapAdd<double>(*x, R, win, carry));
    }, step);
    out.push_back({"overlap_add", r});
  }

  {
    const int n = 256;
    const auto ref = Random(n, 30), mix = Random(n, 31);
    auto ev = Random(n, 32);
    const metrics::PcmConfig pcm{64, 32};
    auto r = ad::CheckInputGradients(ev, [&](G& g, const std::vector<double>& v, Tn* x) {
      *x = g.Variable({1, n}, v);
      return metrics::PcmLoss<double>(*x, ref, mix, pcm);
    }, step);
    out.push_back({"pcm_loss", r});
  }

  model::DrnConfig c;
  c.channels = 2;
  c.shift = 4;
  c.input_window = 8;
  c.output_window = 8;
  c.hidden = 8;
  c.channel_embed = 4;
  c.frame_embed = 4;
  c.lstm_layers = 2;
  c.embedding = model::EmbeddingMode::kAzimuthElevation;
  c.fusion = model::FusionMode::kBoth;
  c.grid = model::DoaGrid::FromResolution(45.0, 45.0);
  const int frames = 4;
  dsp::Waveform x(2, frames * c.shift, Random(2 * frames * c.shift, 40));
  Rng rng(41);
  model::DoaStream doa;
  for (int t = 0; t < frames; ++t) {
    doa.azimuth.push_back(rng.UniformInt(0, c.grid.azimuth_bins - 1));
    doa.elevation.push_back(rng.UniformInt(0, c.grid.elevation_bins - 1));
  }
  for (auto domain : {model::Domain::kTime, model::Domain::kFrequency}) {
    c.domain = domain;
    model::DrnModel<double> m(c);
    m.Initialize(21);
    auto r = ad::CheckParameterGradients(m.params(), [&](G& g) {
      auto state = model::DrnState<double>::Zeros(c);
      return Project(g, m.BuildFrames(g, x, 0, frames, doa, state));
    }, step);
    out.push_back({"drn_micro_" + model::ToString(domain), r});
  }
  return out;
}

}  // namespace drn::train
