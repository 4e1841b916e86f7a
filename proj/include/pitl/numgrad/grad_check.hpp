#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pitl/numgrad/param.hpp"
#include "pitl/numgrad/tape.hpp"

namespace pitl {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Scalar function of some parameters, built on the tape it is handed.
using ScalarFn = std::function<Var(Tape&)>;

/// |a - n| / max(1, |a|, |n|)
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of `f` with central differences
/// (f(p + step) - f(p - step)) / (2 step) for every entry of every parameter.
/// Parameter values are restored afterwards; their grad slots are overwritten.
GradCheckReport grad_check(const ScalarFn& f, std::span<Param* const> params, double step, double tol);

}  // namespace pitl
