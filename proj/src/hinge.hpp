#pragma once

// Shared pieces of the binary hinge solvers (linear and kernel).

#include "fairsel/core.hpp"

#include <vector>

namespace fairsel::detail {

/// The selected points of a hinge problem with their loss weights.
struct HingeSet {
    std::vector<std::size_t> idx;
    std::vector<double> c;
    std::vector<double> y;
};

HingeSet make_hinge_set(const Dataset& data, const Selection& z, std::span<const double> weights);

/// Resolved per-point weights (1/N when none are given).
std::vector<double> resolve_weights(std::span<const double> weights, std::size_t n);

struct Intercept {
    double b = 0.0;
    bool at_kink = false;
    double theta = 0.0;  ///< multiplier of the points sitting exactly at the kink
};

/// Exact minimizer over b of sum c_r max(0, 1 - y_r (m_r + b)); the midpoint when the minimizers form an interval.
Intercept best_intercept(const std::vector<double>& m, const HingeSet& hs);

double hinge_sum(const std::vector<double>& m, double b, const HingeSet& hs);

/// Subgradient multiplier in [0, 1] of point r under the chosen intercept.
double active_factor(double m, double y, const Intercept& ic);

double step_size(int k, double lambda, double base_rate, int schedule);

}  // namespace fairsel::detail
