#include <gtest/gtest.h>

#include <cmath>

#include "drn/ad/gradcheck.h"
#include "drn/ad/ops.h"
#include "drn/metrics/metrics.h"
#include "drn/metrics/pcm_loss.h"
#include "drn/metrics/report.h"
#include "drn/util/rng.h"

namespace drn::metrics {
namespace {

std::vector<double> Random(int n, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.Uniform(-1, 1);
  return v;
}

dsp::Waveform Mono(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return dsp::Waveform(1, n, std::move(v));
}

TEST(SiSdrTest, ScaleInvarianceAndCap) {
  auto ref = Random(1000, 1);
  std::vector<double> half(ref);
  for (auto& v : half) v *= 0.5;
  EXPECT_EQ(SiSdr(half, ref), 100.0);
  auto est = Random(1000, 2);
  for (double c : {0.1, 2.0, 37.0}) {
    std::vector<double> s(est);
    for (auto& v : s) v *= c;
    EXPECT_NEAR(SiSdr(s, ref), SiSdr(est, ref), 1e-9);
  }
}

TEST(SiSdrTest, OrthogonalFloorAndClosedForm) {
  std::vector<double> ref = {1, 0, 1, 0};
  std::vector<double> orth = {0, 1, 0, 1};
  EXPECT_EQ(SiSdr(orth, ref), -100.0);
  // n orthogonal to ref with |n|^2 / |ref|^2 = 0.01.
  std::vector<double> est = {1, 0.1, 1, 0.1};
  EXPECT_NEAR(SiSdr(est, ref), 20.0, 1e-9);
}

TEST(SiSdrTest, Errors) {
  std::vector<double> z(4, 0.0), a(4, 1.0), b(3, 1.0);
  EXPECT_THROW(SiSdr(a, z), std::invalid_argument);
  EXPECT_THROW(SiSdr(a, b), std::invalid_argument);
  EXPECT_THROW(Snr(a, z), std::invalid_argument);
}

TEST(SnrTest, ClosedForms) {
  auto ref = Random(500, 3);
  EXPECT_EQ(Snr(ref, ref), 100.0);
  std::vector<double> zero(500, 0.0);
  EXPECT_NEAR(Snr(zero, ref), 0.0, 1e-12);
  for (double c : {1.1, 2.0, 0.5, -1.0}) {
    std::vector<double> s(ref);
    for (auto& v : s) v *= c;
    EXPECT_NEAR(Snr(s, ref), -20.0 * std::log10(std::abs(c - 1.0)), 1e-9) << c;
  }
}

TEST(PcmLossTest, PerfectEstimatesGiveZero) {
  auto ref = Mono(Random(3000, 4));
  auto mix = Mono(Random(3000, 5));
  EXPECT_EQ(PcmLossValue(ref, ref, mix), 0.0);
  EXPECT_EQ(PcmLossValue(mix, mix, mix), 0.0);
}

TEST(PcmLossTest, PositiveForWrongEstimateAndLengthCheck) {
  auto ref = Mono(Random(3000, 4));
  auto mix = Mono(Random(3000, 5));
  auto est = Mono(Random(3000, 6));
  EXPECT_GT(PcmLossValue(est, ref, mix), 0.0);
  EXPECT_THROW(PcmLossValue(Mono(Random(2999, 6)), ref, mix),
               std::invalid_argument);
}

TEST(PcmLossTest, GraphValueMatchesPlainValue) {
  auto ref = Random(2000, 7), mix = Random(2000, 8), est = Random(2000, 9);
  ad::Graph<double> g;
  auto e = g.Variable({1, 2000}, est);
  auto loss = PcmLoss(e, ref, mix);
  EXPECT_NEAR(loss.item(), PcmLossValue(Mono(est), Mono(ref), Mono(mix)), 1e-12);
}

TEST(PcmLossTest, Gradcheck) {
  const PcmConfig cfg{64, 32};
  auto ref = Random(200, 10), mix = Random(200, 11), est = Random(200, 12);
  auto report = ad::CheckInputGradients(
      est, [&](ad::Graph<double>& g, const std::vector<double>& v,
               ad::Tensor<double>* out) {
        *out = g.Variable({1, 200}, v);
        return PcmLoss(*out, ref, mix, cfg);
      });
  EXPECT_TRUE(report.Passed(1e-3))
      << report.worst.index << " rel=" << report.max_rel_error;
}

TEST(PcmLossTest, DefaultGeometryGradcheck) {
  auto ref = Random(700, 13), mix = Random(700, 14), est = Random(700, 15);
  auto report = ad::CheckInputGradients(
      est, [&](ad::Graph<double>& g, const std::vector<double>& v,
               ad::Tensor<double>* out) {
        *out = g.Variable({1, 700}, v);
        return PcmLoss(*out, ref, mix);
      });
  EXPECT_TRUE(report.Passed(1e-3)) << report.max_rel_error;
}

TEST(ReportTest, AggregatesMatchRows) {
  MetricReport r;
  Rng rng(16);
  std::vector<double> si;
  for (int i = 0; i < 25; ++i) {
    MetricRow row;
    row.id = "u" + std::to_string(i);
    row.si_sdr_db = rng.Uniform(-5, 15);
    row.snr_db = rng.Uniform(-5, 15);
    row.mix_snr_db = rng.Uniform(-5, 5);
    si.push_back(row.si_sdr_db);
    r.Add(row);
  }
  MetricRow bad;
  bad.id = "broken";
  bad.error = "missing file, really";
  r.Add(bad);
  double mean = 0.0;
  for (double v : si) mean += v;
  mean /= si.size();
  auto a = r.Get("si_sdr_db");
  EXPECT_NEAR(a.mean, mean, 1e-9);
  EXPECT_EQ(a.count, 25);
  EXPECT_GT(a.ci95, 0.0);
  EXPECT_EQ(r.failed(), 1);
  double dmean = 0.0;
  for (const auto& row : r.rows()) {
    if (row.ok()) dmean += row.delta_snr_db();
  }
  EXPECT_NEAR(r.Get("delta_snr_db").mean, dmean / 25, 1e-9);
  auto csv = r.ToCsv();
  EXPECT_NE(csv.find("broken,,,,,,,,missing file; really"), std::string::npos);
  EXPECT_EQ(r.ToJson()["failed"], 1);
}

TEST(ReportTest, SummarizeClosedForm) {
  auto a = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(a.mean, 2.5);
  EXPECT_NEAR(a.ci95, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

}  // namespace
}  // namespace drn::metrics
