#pragma once

// Generators and from-the-definition reference implementations for the tests.

#include "fairsel/core.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace testing {

using fairsel::FairnessKind;
using fairsel::FairnessSpec;
using fairsel::Selection;

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(gen); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
    int sign() { return integer(0, 1) ? 1 : -1; }
};

/// Labels and groups with all four (group, label) cells nonempty (N >= 4).
inline void random_tags(Rng& r, std::size_t n, std::vector<int>& y, std::vector<int>& g) {
    y.assign(n, 1);
    g.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (i < 4) {
            g[i] = i < 2 ? 1 : -1;
            y[i] = i % 2 == 0 ? 1 : -1;
        } else {
            g[i] = r.sign();
            y[i] = r.sign();
        }
    }
    // shuffle so the forced cells are not always at the front
    for (std::size_t i = n; i-- > 1;) {
        auto j = static_cast<std::size_t>(r.integer(0, static_cast<int>(i)));
        std::swap(y[i], y[j]);
        std::swap(g[i], g[j]);
    }
}

/// Binary dataset: y = +-1 with a shifted gaussian cloud per label.
inline fairsel::Dataset random_binary(Rng& r, std::size_t n, std::size_t dim, double shift = 1.0) {
    fairsel::Dataset d;
    random_tags(r, n, d.labels, d.groups);
    d.features = fairsel::Matrix(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) d.features(i, j) = r.normal(j == 0 ? shift * d.labels[i] : 0.0, 1.0);
    return d;
}

/// Multiclass dataset with every class and both groups present (n >= classes + 1).
inline fairsel::Dataset random_multiclass(Rng& r, std::size_t n, std::size_t dim, int classes) {
    fairsel::Dataset d;
    d.class_count = classes;
    d.features = fairsel::Matrix(n, dim);
    d.labels.resize(n);
    d.groups.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.labels[i] = i < static_cast<std::size_t>(classes) ? static_cast<int>(i) + 1 : r.integer(1, classes);
        d.groups[i] = i == 0 ? 1 : (i == 1 ? -1 : r.sign());
        for (std::size_t j = 0; j < dim; ++j)
            d.features(i, j) = r.normal(static_cast<int>(j) % classes == d.labels[i] - 1 ? 1.5 : 0.0, 1.0);
    }
    return d;
}

inline double rate(const Selection& z, const std::vector<std::size_t>& idx) {
    double c = 0.0;
    for (auto i : idx) c += z.z[i];
    return c / static_cast<double>(idx.size());
}

/// Fairness values straight from the definitions, with 1 - F1 through the confusion matrix.
inline double reference_fairness(const Selection& z, const FairnessSpec& s, FairnessKind kind) {
    switch (kind) {
        case FairnessKind::OMR: return std::fabs(rate(z, s.d_plus) - rate(z, s.d_minus));
        case FairnessKind::FPR: return std::fabs(rate(z, s.d_pm) - rate(z, s.d_mm));
        case FairnessKind::EO: return std::fabs(rate(z, s.d_pp) - rate(z, s.d_mp));
        case FairnessKind::DP: {
            auto pos_rate = [&](const std::vector<std::size_t>& pp, const std::vector<std::size_t>& pm,
                                std::size_t total) {
                double c = 0.0;
                for (auto i : pp) c += z.z[i];       // positive label predicted positive
                for (auto i : pm) c += 1 - z.z[i];   // negative label predicted positive
                return c / static_cast<double>(total);
            };
            return std::fabs(pos_rate(s.d_pp, s.d_pm, s.d_plus.size()) - pos_rate(s.d_mp, s.d_mm, s.d_minus.size()));
        }
        case FairnessKind::F1Complement: {
            double tp = 0, fn = 0, fp = 0;
            for (auto i : s.n_plus) (z.z[i] ? tp : fn) += 1;
            for (auto i : s.n_minus) fp += 1 - z.z[i];
            return 1.0 - 2.0 * tp / (2.0 * tp + fp + fn);
        }
    }
    return 0.0;
}

struct BruteResult {
    double value = 0.0;
    Selection z;
};

/// min over all 2^N selections of sum z_i cost_i + rho F(z), one pass for several rho.
inline std::vector<BruteResult> brute_min(const std::vector<double>& cost, const FairnessSpec& s, FairnessKind kind,
                                          const std::vector<double>& rhos) {
    const std::size_t n = cost.size();
    std::vector<BruteResult> best(rhos.size());
    for (auto& b : best) b.value = INFINITY;
    Selection z(n);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            z.z[i] = (mask >> i) & 1u;
            if (z.z[i]) c += cost[i];
        }
        double f = reference_fairness(z, s, kind);
        for (std::size_t k = 0; k < rhos.size(); ++k) {
            double v = c + rhos[k] * f;
            if (v < best[k].value) best[k] = {v, z};
        }
    }
    return best;
}

inline std::int64_t brute_s_hat_den(std::int64_t dp, std::int64_t dm, std::int64_t& num) {
    // smallest positive |a/dp - b/dm| = |a dm - b dp| / (dp dm)
    std::int64_t best = -1;
    for (std::int64_t a = 0; a <= dp; ++a)
        for (std::int64_t b = 0; b <= dm; ++b) {
            std::int64_t d = std::llabs(a * dm - b * dp);
            if (d > 0 && (best < 0 || d < best)) best = d;
        }
    std::int64_t den = dp * dm, g = std::gcd(best, den);
    num = best / g;
    return den / g;
}

}  // namespace testing
