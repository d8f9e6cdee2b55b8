#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "srnn/diffgraph.hpp"
#include "srnn/numerics.hpp"
#include "srnn/rng.hpp"

namespace srnn {

struct Coordinate {
  std::size_t param = 0;
  std::size_t index = 0;
};

struct CoordinateCheck {
  Coordinate coord;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool finite = true;
};

struct GradCheckReport {
  std::vector<CoordinateCheck> checks;
  double max_rel_error = 0.0;
  bool all_finite = true;

  bool passed(double tolerance) const { return all_finite && max_rel_error < tolerance; }
};

// `per_param` coordinates from every tensor (fewer if the tensor is smaller).
inline std::vector<Coordinate> sample_coordinates(const ad::ParameterCollection& params,
                                                  std::size_t per_param, Rng& rng) {
  std::vector<Coordinate> out;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::size_t n = params[p].value.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < std::min(per_param, n); ++k) out.push_back({p, idx[k]});
  }
  return out;
}

// Compares the tape gradient of build(graph) against central differences on
// the chosen coordinates. `build` must return a scalar node and must read
// parameter values afresh on every call. Parameter::grad is left zeroed.
template <class Build>
GradCheckReport check_gradients(ad::ParameterCollection& params, Build&& build,
                                std::span<const Coordinate> coords, double step = 1e-4,
                                ad::Fault fault = ad::Fault::none) {
  params.zero_grad();
  {
    ad::Graph g;
    g.inject_fault(fault);
    ad::Expr root = build(g);
    g.backward(root);
    g.accumulate_parameter_gradients();
  }
  std::vector<double> point;
  for (const Coordinate& c : coords) point.push_back(params[c.param].value[c.index]);

  auto f = [&](std::span<const double> x) {
    for (std::size_t k = 0; k < coords.size(); ++k) {
      params[coords[k].param].value[coords[k].index] = x[k];
    }
    ad::Graph g;
    return g.scalar(build(g));
  };
  const auto numeric = finite_difference_gradient(f, point, step);
  for (std::size_t k = 0; k < coords.size(); ++k) {
    params[coords[k].param].value[coords[k].index] = point[k];
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    CoordinateCheck c;
    c.coord = coords[k];
    c.analytic = params[coords[k].param].grad[coords[k].index];
    c.numeric = numeric[k].value;
    c.finite = numeric[k].finite && std::isfinite(c.analytic);
    c.rel_error = c.finite ? relative_error(c.analytic, c.numeric) : 0.0;
    report.all_finite = report.all_finite && c.finite;
    report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
    report.checks.push_back(c);
  }
  params.zero_grad();
  return report;
}

}  // namespace srnn
