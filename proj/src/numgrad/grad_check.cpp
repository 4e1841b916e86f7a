#include "pitl/numgrad/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "pitl/errors.hpp"

namespace pitl {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const ScalarFn& f) {
  Tape tape;
  const Var out = f(tape);
  const Tensor2D& v = out.value();
  if (v.size() != 1) throw DimensionError("grad_check: function must return 1x1, got " + v.shape_str());
  if (!std::isfinite(v[0])) throw EvaluationError("grad_check: function evaluated to a non-finite value");
  return v[0];
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, std::span<Param* const> params, double step, double tol) {
  for (Param* p : params) p->zero_grad();
  {
    Tape tape;
    const Var out = f(tape);
    if (!std::isfinite(out.value()[0])) {
      throw EvaluationError("grad_check: function evaluated to a non-finite value");
    }
    tape.backward(out);
  }

  GradCheckReport report;
  for (Param* p : params) {
    GradCheckEntry entry{p->name, 0.0};
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + step;
      const double plus = evaluate(f);
      p->value[i] = original - step;
      const double minus = evaluate(f);
      p->value[i] = original;
      const double numeric = (plus - minus) / (2.0 * step);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(p->grad[i], numeric));
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace pitl
