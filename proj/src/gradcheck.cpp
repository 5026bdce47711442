#include "rfdae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfdae/errors.hpp"

namespace rfdae {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(Differentiable& unit, Rng& rng, double tolerance,
                           const GradCheckOptions& options) {
  std::vector<ParamTensor> params = unit.parameters();
  const std::vector<std::vector<double>> analytic = unit.gradients();
  if (analytic.size() != params.size()) {
    throw ShapeError("grad_check: gradient count does not match parameter count");
  }

  GradCheckReport report;
  const double h = options.step;
  for (std::size_t t = 0; t < params.size(); ++t) {
    ParamTensor& p = params[t];
    if (analytic[t].size() != p.values.size()) {
      throw ShapeError("grad_check: gradient shape mismatch for " + p.name);
    }
    std::vector<std::size_t> probe(p.values.size());
    std::iota(probe.begin(), probe.end(), std::size_t{0});
    if (options.max_probes_per_tensor != 0 && probe.size() > options.max_probes_per_tensor) {
      rng.shuffle(std::span<std::size_t>(probe));
      probe.resize(options.max_probes_per_tensor);
      std::sort(probe.begin(), probe.end());
    }

    TensorCheck check;
    check.name = p.name;
    check.probes = probe.size();
    for (std::size_t idx : probe) {
      const double saved = p.values[idx];
      p.values[idx] = saved + h;
      const double up = unit.loss();
      p.values[idx] = saved - h;
      const double down = unit.loss();
      p.values[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("grad_check: non-finite loss while probing " + p.name + "[" +
                           std::to_string(idx) + "]");
      }
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[t][idx], numeric);
      if (err > check.max_relative_error || check.worst_index == kNoIndex) {
        check.max_relative_error = err;
        check.worst_index = idx;
        check.worst_analytic = analytic[t][idx];
        check.worst_numeric = numeric;
      }
    }
    if (report.parameter_name.empty() || check.max_relative_error > report.max_relative_error) {
      report.max_relative_error = check.max_relative_error;
      report.parameter_name = p.name;
      report.worst_index = check.worst_index;
      report.worst_analytic = check.worst_analytic;
      report.worst_numeric = check.worst_numeric;
    }
    report.tensors.push_back(std::move(check));
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

}  // namespace rfdae
