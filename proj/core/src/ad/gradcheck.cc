#include "drn/ad/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace drn::ad {

double RelativeError(double analytic, double numeric, double floor) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

void Record(GradCheckReport& report, GradCheckEntry& param_worst,
            GradCheckEntry entry) {
  ++report.checked;
  if (entry.rel_error > param_worst.rel_error || param_worst.name.empty()) {
    param_worst = entry;
  }
  if (entry.rel_error > report.max_rel_error || report.checked == 1) {
    report.max_rel_error = std::max(report.max_rel_error, entry.rel_error);
    report.worst = entry;
  }
}

}  // namespace

GradCheckReport CheckParameterGradients(ParameterSet<double>& params,
                                        const LossBuilder& build_loss,
                                        double step) {
  params.ZeroGrad();
  {
    Graph<double> graph;
    Tensor<double> loss = build_loss(graph);
    graph.Backward(loss);
    graph.CollectParamGrads(params);
  }
  auto evaluate = [&]() {
    Graph<double> graph;
    graph.set_grad_enabled(false);
    return build_loss(graph).item();
  };
  GradCheckReport report;
  for (int i = 0; i < params.count(); ++i) {
    auto& p = params[i];
    GradCheckEntry param_worst;
    for (size_t k = 0; k < p.size(); ++k) {
      const double saved = p.value()[k];
      p.value()[k] = saved + step;
      const double up = evaluate();
      p.value()[k] = saved - step;
      const double down = evaluate();
      p.value()[k] = saved;
      GradCheckEntry e;
      e.name = p.name();
      e.index = k;
      e.analytic = p.grad()[k];
      e.numeric = (up - down) / (2.0 * step);
      e.rel_error = RelativeError(e.analytic, e.numeric);
      Record(report, param_worst, e);
    }
    report.per_parameter.push_back(param_worst);
  }
  return report;
}

GradCheckReport CheckInputGradients(const std::vector<double>& input,
                                    const InputLossBuilder& build_loss,
                                    double step) {
  std::vector<double> analytic;
  {
    Graph<double> graph;
    Tensor<double> x;
    Tensor<double> loss = build_loss(graph, input, &x);
    graph.Backward(loss);
    auto g = x.grad();
    analytic.assign(g.begin(), g.end());
  }
  auto evaluate = [&](const std::vector<double>& v) {
    Graph<double> graph;
    graph.set_grad_enabled(false);
    Tensor<double> x;
    return build_loss(graph, v, &x).item();
  };
  GradCheckReport report;
  GradCheckEntry worst;
  std::vector<double> probe = input;
  for (size_t k = 0; k < input.size(); ++k) {
    probe[k] = input[k] + step;
    const double up = evaluate(probe);
    probe[k] = input[k] - step;
    const double down = evaluate(probe);
    probe[k] = input[k];
    GradCheckEntry e;
    e.name = "input";
    e.index = k;
    e.analytic = analytic[k];
    e.numeric = (up - down) / (2.0 * step);
    e.rel_error = RelativeError(e.analytic, e.numeric);
    Record(report, worst, e);
  }
  report.per_parameter.push_back(worst);
  return report;
}

}  // namespace drn::ad
