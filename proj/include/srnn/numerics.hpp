#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace srnn {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(v_i)) with a max shift. -inf is the identity; an empty
// list is the log of an empty sum.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    return neg_inf;
  }
  double top = *std::max_element(values.begin(), values.end());
  if (std::isinf(top)) {
    return top;
  }
  double total = 0.0;
  for (double v : values) {
    total += std::exp(v - top);
  }
  return top + std::log(total);
}

inline double log_sum_exp(std::initializer_list<double> values) {
  return log_sum_exp(std::span<const double>(values.begin(), values.size()));
}

inline double log_add(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  double top = std::max(a, b);
  return top + std::log1p(std::exp(-std::abs(a - b)));
}

struct FiniteDifference {
  double value = 0.0;
  bool finite = true;
};

// Central differences of f at `point`, one coordinate at a time.
// f is called as f(std::span<const double>).
template <class F>
std::vector<FiniteDifference> finite_difference_gradient(F&& f, std::vector<double> point,
                                                         double step) {
  std::vector<FiniteDifference> out(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = f(std::span<const double>(point));
    point[i] = saved - step;
    const double down = f(std::span<const double>(point));
    point[i] = saved;
    out[i].finite = std::isfinite(up) && std::isfinite(down);
    out[i].value = out[i].finite ? (up - down) / (2.0 * step) : 0.0;
  }
  return out;
}

// |a - b| / max(|a|, |b|, floor). The floor keeps coordinates whose true
// derivative is ~0 from dominating with pure round-off.
inline double relative_error(double a, double b, double floor = 1e-6) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

}  // namespace srnn
