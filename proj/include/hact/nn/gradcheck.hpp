#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "hact/core/rng.hpp"
#include "hact/nn/parameter.hpp"

namespace hact::nn {

struct GradcheckOptions {
  double h = 1e-5;
  /// Denominator floor so that two tiny gradients do not yield a huge ratio.
  /// Central-difference roundoff on an O(1) loss is around 1e-10.
  double floor = 1e-5;
  /// Entries checked per parameter tensor; 0 checks every entry.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
  /// Skip entries where the estimates at h and h/10 disagree by more than
  /// `smooth_tol` (relative): the loss has a ReLU or max/min kink within h of
  /// the point there, so finite differences say nothing about the gradient.
  bool skip_nonsmooth = false;
  double smooth_tol = 1e-5;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

inline double relative_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

/// Compares analytic gradients against central differences.
/// `loss` evaluates the scalar closure at the current parameter values;
/// `gradients` zeroes and fills every parameter's grad at those values.
inline GradcheckResult gradcheck(const ParamList& params, const std::function<double()>& loss,
                                 const std::function<void()>& gradients, const GradcheckOptions& opt = {}) {
  gradients();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, p] : params) analytic.push_back(p->grad);

  Rng rng(opt.seed);
  GradcheckResult res;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi].second;
    std::vector<std::size_t> idx(p.value.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (opt.max_entries && idx.size() > opt.max_entries) {
      rng.shuffle(idx);
      idx.resize(opt.max_entries);
      std::sort(idx.begin(), idx.end());
    }
    auto central = [&](std::size_t k, double h) {
      const double orig = p.value[k];
      p.value[k] = orig + h;
      const double up = loss();
      p.value[k] = orig - h;
      const double down = loss();
      p.value[k] = orig;
      return (up - down) / (2.0 * h);
    };
    for (const std::size_t k : idx) {
      const double num = central(k, opt.h);
      if (opt.skip_nonsmooth && relative_error(num, central(k, opt.h / 10.0), opt.floor) > opt.smooth_tol) {
        ++res.skipped;
        continue;
      }
      const double err = relative_error(analytic[pi][k], num, opt.floor);
      ++res.checked;
      if (err > res.max_rel_error || res.worst_param.empty()) {
        res.max_rel_error = err;
        res.worst_param = params[pi].first;
        res.worst_index = k;
        res.analytic = analytic[pi][k];
        res.numeric = num;
      }
    }
  }
  return res;
}

}  // namespace hact::nn
