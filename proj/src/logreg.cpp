#include "fairsel/train.hpp"

#include "hinge.hpp"

#include <algorithm>
#include <cmath>

namespace fairsel {

namespace {

const double kLogLo = std::log(1e-12);
const double kLogHi = std::log1p(-1e-12);

double log_sigmoid(double s) {
    double v = s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
    return std::clamp(v, kLogLo, kLogHi);
}

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    double e = std::exp(s);
    return e / (1.0 + e);
}

struct Problem {
    const Dataset& data;
    std::vector<std::size_t> idx;
    std::vector<double> c;
    double lambda;

    double value(const std::vector<double>& w, double b) const {
        double s = 0.0;
        for (std::size_t r = 0; r < idx.size(); ++r) {
            double y = data.labels[idx[r]];
            s -= c[r] * log_sigmoid(y * (dot(w, data.x(idx[r])) + b));
        }
        return s + lambda * squared_norm(w);
    }

    /// Gradient in (w, b) order; also returns the curvature sum c sigma (1 - sigma) along b.
    std::vector<double> gradient(const std::vector<double>& w, double b, double* curvature = nullptr) const {
        const std::size_t n = w.size();
        std::vector<double> g(n + 1, 0.0);
        double curv = 0.0;
        for (std::size_t j = 0; j < n; ++j) g[j] = 2.0 * lambda * w[j];
        for (std::size_t r = 0; r < idx.size(); ++r) {
            double y = data.labels[idx[r]];
            auto x = data.x(idx[r]);
            double p = sigmoid(y * (dot(w, x) + b));
            double coef = -c[r] * y * (1.0 - p);
            for (std::size_t j = 0; j < n; ++j) g[j] += coef * x[j];
            g[n] += coef;
            curv += c[r] * p * (1.0 - p);
        }
        if (curvature) *curvature = curv;
        return g;
    }
};

Problem make_problem(const Dataset& data, const Selection& z, const HyperParams& h, Weights weights) {
    if (!data.is_binary()) throw InvalidInput("binary labels required");
    if (z.size() != data.size()) throw InvalidInput("selection length mismatch");
    auto wts = detail::resolve_weights(weights, data.size());
    Problem p{data, {}, {}, h.lambda};
    for (std::size_t i = 0; i < data.size(); ++i)
        if (z.z[i]) {
            p.idx.push_back(i);
            p.c.push_back(wts[i]);
        }
    return p;
}

}  // namespace

Scores log_likelihoods(const LinearModel& m, const Dataset& data) {
    if (!data.is_binary()) throw InvalidInput("binary labels required");
    Scores s;
    s.direction = Direction::CorrectWhenAtLeast;
    s.values.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) s.values[i] = log_sigmoid(data.labels[i] * m.decision(data.x(i)));
    return s;
}

double logreg_objective(const Dataset& data, const Selection& z, const HyperParams& h, const LinearModel& m,
                        Weights weights) {
    return make_problem(data, z, h, weights).value(m.w, m.b);
}

std::vector<double> logreg_gradient(const Dataset& data, const Selection& z, const HyperParams& h,
                                    const LinearModel& m, Weights weights) {
    return make_problem(data, z, h, weights).gradient(m.w, m.b);
}

LinearFit fit_logreg_weighted(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                              Weights weights, const LinearModel* warm) {
    cfg.validate();
    auto prob = make_problem(data, z, h, weights);
    if (prob.idx.empty()) throw DegenerateSelection("empty selection");
    const std::size_t n = data.dim();
    std::vector<double> w(n, 0.0);
    double b = 0.0;
    if (warm) {
        if (warm->w.size() != n) throw InvalidInput("warm start dimension mismatch");
        w = warm->w;
        b = warm->b;
    }
    double f = prob.value(w, b);
    double step = cfg.base_rate;
    double curv = 0.0;
    auto g = prob.gradient(w, b, &curv);
    int it = 0;
    for (; it < cfg.iterations; ++it) {
        double gmax = 0.0, gg = 0.0;
        for (double v : g) {
            gmax = std::max(gmax, std::fabs(v));
            gg += v * v;
        }
        if (gmax < cfg.tolerance) break;
        bool accepted = false;
        for (int tries = 0; tries < 60; ++tries) {
            std::vector<double> w2(n);
            for (std::size_t j = 0; j < n; ++j) w2[j] = w[j] - step * g[j];
            double b2 = b - step * g[n];
            double f2 = prob.value(w2, b2);
            if (f2 <= f - 0.5 * step * gg) {
                w = std::move(w2);
                b = b2;
                f = f2;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        g = prob.gradient(w, b, &curv);
    }

    LinearFit fit;
    fit.model.w = w;
    fit.model.b = b;
    fit.scores = log_likelihoods(fit.model, data);
    fit.objective = f;
    fit.iterations = it;
    double gw = 0.0;
    for (std::size_t j = 0; j < n; ++j) gw += g[j] * g[j];
    double gb = g[n] * g[n];
    if (gw == 0.0 && gb == 0.0) fit.residual = 0.0;
    else if (h.lambda > 0.0 && curv > 0.0) fit.residual = gw / (4.0 * h.lambda) + gb / (2.0 * curv);
    return fit;
}

}  // namespace fairsel
