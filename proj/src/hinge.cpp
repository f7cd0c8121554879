#include "hinge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairsel::detail {

std::vector<double> resolve_weights(std::span<const double> weights, std::size_t n) {
    if (weights.empty()) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    if (weights.size() != n) throw InvalidInput("weight vector length mismatch");
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and >= 0");
    return {weights.begin(), weights.end()};
}

HingeSet make_hinge_set(const Dataset& data, const Selection& z, std::span<const double> weights) {
    if (z.size() != data.size()) throw InvalidInput("selection length mismatch");
    auto w = resolve_weights(weights, data.size());
    HingeSet hs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!z.z[i]) continue;
        hs.idx.push_back(i);
        hs.c.push_back(w[i]);
        hs.y.push_back(static_cast<double>(data.labels[i]));
    }
    return hs;
}

Intercept best_intercept(const std::vector<double>& m, const HingeSet& hs) {
    const std::size_t s = hs.idx.size();
    Intercept out;
    if (s == 0) return out;
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> kink(s);
    double cplus = 0.0;
    for (std::size_t r = 0; r < s; ++r) {
        kink[r] = hs.y[r] - m[r];
        if (hs.y[r] > 0) cplus += hs.c[r];
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return kink[a] < kink[b] || (kink[a] == kink[b] && a < b);
    });

    // right slope starts at -cplus and every kink adds its weight
    double slope = -cplus;
    double total = 0.0;
    for (double c : hs.c) total += c;
    const double flat = 1e-12 * total;
    if (cplus == 0.0) {
        out.b = kink[order.front()];
        return out;
    }
    std::size_t r = 0;
    bool found = false;
    while (r < s) {
        std::size_t e = r;
        double gsum = 0.0;
        while (e < s && kink[order[e]] == kink[order[r]]) gsum += hs.c[order[e++]];
        double after = slope + gsum;
        if (after > flat) {
            out.b = kink[order[r]];
            out.at_kink = true;
            found = true;
            break;
        }
        if (after >= -flat) {
            out.b = e < s ? 0.5 * (kink[order[r]] + kink[order[e]]) : kink[order[r]];
            out.at_kink = e >= s;
            found = true;
            break;
        }
        slope = after;
        r = e;
    }
    if (!found) out.b = kink[order.back()];
    if (out.at_kink) {
        double act = 0.0, grp = 0.0;
        for (std::size_t q = 0; q < s; ++q) {
            double k = kink[q];
            if (k == out.b) grp += hs.c[q] * hs.y[q];
            else if ((hs.y[q] > 0 && k > out.b) || (hs.y[q] < 0 && k < out.b)) act += hs.c[q] * hs.y[q];
        }
        out.theta = grp != 0.0 ? std::clamp(-act / grp, 0.0, 1.0) : 0.0;
    }
    return out;
}

double hinge_sum(const std::vector<double>& m, double b, const HingeSet& hs) {
    double s = 0.0;
    for (std::size_t r = 0; r < hs.idx.size(); ++r) s += hs.c[r] * std::max(0.0, 1.0 - hs.y[r] * (m[r] + b));
    return s;
}

double active_factor(double m, double y, const Intercept& ic) {
    double k = y - m;
    if (ic.at_kink && k == ic.b) return ic.theta;
    return (y > 0 ? k > ic.b : k < ic.b) ? 1.0 : 0.0;
}

double step_size(int k, double lambda, double base_rate, int schedule) {
    // schedule: 0 auto, 1 inverse-sqrt, 2 inverse-linear
    bool linear = schedule == 2 || (schedule == 0 && lambda > 0.0);
    if (!linear) return base_rate / std::sqrt(static_cast<double>(k));
    double denom = lambda > 0.0 ? lambda * k : static_cast<double>(k);
    return base_rate / denom;
}

}  // namespace fairsel::detail
