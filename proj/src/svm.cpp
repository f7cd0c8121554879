#include "fairsel/train.hpp"

#include "hinge.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fairsel {

using detail::HingeSet;

void Kernel::validate() const {
    if (type == KernelType::RBF && !(gamma > 0.0)) throw InvalidInput("RBF gamma must be > 0");
    if (type == KernelType::Polynomial && degree < 1) throw InvalidInput("polynomial degree must be >= 1");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    switch (type) {
        case KernelType::Linear: return dot(a, b);
        case KernelType::RBF: {
            double d = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
            return std::exp(-gamma * d);
        }
        case KernelType::Polynomial: return std::pow(dot(a, b) + coef, degree);
    }
    return 0.0;
}

void TrainConfig::validate() const {
    if (iterations < 1) throw InvalidInput("iterations must be positive");
    if (!(base_rate > 0.0)) throw InvalidInput("base rate must be > 0");
    kernel.validate();
}

namespace {

struct Candidate {
    std::vector<double> w;
    double b = 0.0;
    double objective = 0.0;
};

std::vector<double> linear_margins(const Dataset& data, const HingeSet& hs, const std::vector<double>& w) {
    std::vector<double> m(hs.idx.size());
    for (std::size_t r = 0; r < hs.idx.size(); ++r) m[r] = dot(w, data.x(hs.idx[r]));
    return m;
}

/// Lower bound on the optimum from a dual-feasible multiplier vector; NaN when none is available.
double dual_value(const Dataset& data, const HingeSet& hs, const std::vector<double>& alpha, double lambda) {
    const std::size_t n = data.dim();
    double sum = 0.0;
    std::vector<double> v(n, 0.0);
    for (std::size_t r = 0; r < hs.idx.size(); ++r) {
        sum += alpha[r];
        auto x = data.x(hs.idx[r]);
        for (std::size_t k = 0; k < n; ++k) v[k] += alpha[r] * hs.y[r] * x[k];
    }
    if (lambda > 0.0) return sum - squared_norm(v) / (4.0 * lambda);
    // lambda = 0: the dual needs sum alpha y x = 0 exactly
    double scale = 0.0;
    for (std::size_t r = 0; r < hs.idx.size(); ++r) scale += alpha[r] * std::sqrt(squared_norm(data.x(hs.idx[r])));
    return std::sqrt(squared_norm(v)) <= 1e-12 * std::max(1.0, scale) ? sum : std::nan("");
}

/// Balances sum alpha y = 0 by shrinking the heavier class; keeps 0 <= alpha <= c.
void balance(std::vector<double>& alpha, const HingeSet& hs) {
    double sp = 0.0, sm = 0.0;
    for (std::size_t r = 0; r < alpha.size(); ++r) (hs.y[r] > 0 ? sp : sm) += alpha[r];
    if (sp == sm) return;
    bool shrink_plus = sp > sm;
    double f = shrink_plus ? (sp > 0 ? sm / sp : 0.0) : (sm > 0 ? sp / sm : 0.0);
    for (std::size_t r = 0; r < alpha.size(); ++r)
        if ((hs.y[r] > 0) == shrink_plus) alpha[r] *= f;
}

struct Polished {
    Candidate cand;
    double residual = kUncertified;
    bool ok = false;
};

/*
 * Guess the points on the margin, solve the stationarity and margin equations
 * for (w, b, alpha_Z) and keep the result only if every KKT condition checks.
 */
Polished polish_linear(const Dataset& data, const HingeSet& hs, const Candidate& from, double lambda) {
    const std::size_t n = data.dim(), s = hs.idx.size();
    auto m = linear_margins(data, hs, from.w);
    std::vector<double> r(s);
    for (std::size_t q = 0; q < s; ++q) r[q] = hs.y[q] * (m[q] + from.b);

    Polished best;
    for (double tol : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
        std::vector<std::size_t> A, Z, I;
        for (std::size_t q = 0; q < s; ++q) {
            if (r[q] < 1.0 - tol) A.push_back(q);
            else if (r[q] > 1.0 + tol) I.push_back(q);
            else Z.push_back(q);
        }
        std::vector<double> cyx(n, 0.0);
        double cy = 0.0;
        for (auto q : A) {
            auto x = data.x(hs.idx[q]);
            for (std::size_t k = 0; k < n; ++k) cyx[k] += hs.c[q] * hs.y[q] * x[k];
            cy += hs.c[q] * hs.y[q];
        }
        Candidate c;
        c.w.assign(n, 0.0);
        std::vector<double> alphaZ(Z.size(), 0.0);
        if (Z.empty()) {
            if (!(lambda > 0.0)) continue;
            double csum = 0.0;
            for (auto q : A) csum += hs.c[q];
            if (std::fabs(cy) > 1e-12 * std::max(1.0, csum)) continue;
            for (std::size_t k = 0; k < n; ++k) c.w[k] = cyx[k] / (2.0 * lambda);
            c.b = from.b;
        } else {
            const std::size_t dim = n + 1 + Z.size();
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
            const auto zi = [&](std::size_t j) { return static_cast<Eigen::Index>(n + 1 + j); };
            for (std::size_t k = 0; k < n; ++k) {
                auto kk = static_cast<Eigen::Index>(k);
                M(kk, kk) = 2.0 * lambda;
                for (std::size_t j = 0; j < Z.size(); ++j) M(kk, zi(j)) = -hs.y[Z[j]] * data.x(hs.idx[Z[j]])[k];
                rhs(kk) = cyx[k];
            }
            const auto bi = static_cast<Eigen::Index>(n);
            for (std::size_t j = 0; j < Z.size(); ++j) M(bi, zi(j)) = hs.y[Z[j]];
            rhs(bi) = -cy;
            for (std::size_t j = 0; j < Z.size(); ++j) {
                auto x = data.x(hs.idx[Z[j]]);
                for (std::size_t k = 0; k < n; ++k) M(zi(j), static_cast<Eigen::Index>(k)) = hs.y[Z[j]] * x[k];
                M(zi(j), bi) = hs.y[Z[j]];
                rhs(zi(j)) = 1.0;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (lu.rank() < static_cast<Eigen::Index>(dim)) continue;
            Eigen::VectorXd sol = lu.solve(rhs);
            if (!sol.allFinite()) continue;
            for (std::size_t k = 0; k < n; ++k) c.w[k] = sol(static_cast<Eigen::Index>(k));
            c.b = sol(bi);
            for (std::size_t j = 0; j < Z.size(); ++j) alphaZ[j] = sol(zi(j));
        }
        // KKT checks
        bool ok = true;
        std::vector<double> alpha(s, 0.0);
        for (auto q : A) alpha[q] = hs.c[q];
        for (std::size_t j = 0; j < Z.size() && ok; ++j) {
            double a = alphaZ[j], cap = hs.c[Z[j]];
            if (a < -1e-9 * cap || a > cap * (1.0 + 1e-9)) ok = false;
            alpha[Z[j]] = std::clamp(a, 0.0, cap);
        }
        if (!ok) continue;
        auto m2 = linear_margins(data, hs, c.w);
        for (auto q : A)
            if (hs.y[q] * (m2[q] + c.b) > 1.0 + 1e-9) ok = false;
        for (auto q : I)
            if (hs.y[q] * (m2[q] + c.b) < 1.0 - 1e-9) ok = false;
        if (!ok) continue;
        c.objective = detail::hinge_sum(m2, c.b, hs) + lambda * squared_norm(c.w);
        double d = dual_value(data, hs, alpha, lambda);
        if (std::isnan(d)) continue;
        best.cand = c;
        best.residual = std::max(0.0, c.objective - d);
        best.ok = true;
        return best;
    }
    return best;
}

bool certified(double residual, double objective) {
    return residual <= 1e-12 * std::max(1.0, std::fabs(objective));
}

}  // namespace

double svm_objective(const Dataset& data, const Selection& z, const HyperParams& h, const LinearModel& m,
                     Weights weights) {
    auto hs = detail::make_hinge_set(data, z, weights);
    return detail::hinge_sum(linear_margins(data, hs, m.w), m.b, hs) + h.lambda * squared_norm(m.w);
}

LinearFit fit_svm_weighted(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                           Weights weights, const LinearModel* warm) {
    if (!data.is_binary()) throw InvalidInput("binary labels required");
    cfg.validate();
    const std::size_t n = data.dim();
    const auto hs = detail::make_hinge_set(data, z, weights);
    if (hs.idx.empty()) throw DegenerateSelection("empty selection");
    const double lambda = h.lambda;

    std::vector<double> w(n, 0.0);
    double b0 = 0.0;
    if (warm) {
        if (warm->w.size() != n) throw InvalidInput("warm start dimension mismatch");
        w = warm->w;
        b0 = warm->b;
    }
    Candidate best;
    best.w = w;
    best.b = b0;
    best.objective = detail::hinge_sum(linear_margins(data, hs, w), b0, hs) + lambda * squared_norm(w);
    auto consider = [&](const std::vector<double>& cw, double cb, double obj) {
        if (obj < best.objective) {
            best.w = cw;
            best.b = cb;
            best.objective = obj;
        }
    };

    double residual = kUncertified;
    std::vector<double> avg(n, 0.0), grad(n);
    int next_polish = 16;
    int k = 1;
    for (; k <= cfg.iterations + 1; ++k) {
        auto m = linear_margins(data, hs, w);
        auto ic = detail::best_intercept(m, hs);
        consider(w, ic.b, detail::hinge_sum(m, ic.b, hs) + lambda * squared_norm(w));
        if (cfg.averaging && k > 1) {
            auto ma = linear_margins(data, hs, avg);
            auto ia = detail::best_intercept(ma, hs);
            consider(avg, ia.b, detail::hinge_sum(ma, ia.b, hs) + lambda * squared_norm(avg));
        }
        if (best.objective <= 0.0) {
            residual = 0.0;  // the objective is nonnegative
            break;
        }
        if (cfg.polish && (k == next_polish || k == cfg.iterations + 1)) {
            next_polish *= 2;
            auto p = polish_linear(data, hs, best, lambda);
            if (p.ok && p.cand.objective <= best.objective + 1e-12 * std::max(1.0, best.objective)) {
                best = p.cand;
                residual = p.residual;
                if (certified(residual, best.objective)) break;
            }
        }
        if (k == cfg.iterations + 1) break;

        for (std::size_t j = 0; j < n; ++j) grad[j] = 2.0 * lambda * w[j];
        for (std::size_t r = 0; r < hs.idx.size(); ++r) {
            double a = detail::active_factor(m[r], hs.y[r], ic);
            if (a == 0.0) continue;
            auto x = data.x(hs.idx[r]);
            for (std::size_t j = 0; j < n; ++j) grad[j] -= a * hs.c[r] * hs.y[r] * x[j];
        }
        double eta = detail::step_size(k, lambda, cfg.base_rate, static_cast<int>(cfg.schedule));
        for (std::size_t j = 0; j < n; ++j) w[j] -= eta * grad[j];
        for (std::size_t j = 0; j < n; ++j) avg[j] += (w[j] - avg[j]) / static_cast<double>(k);
    }

    if (!std::isfinite(residual) && lambda > 0.0) {
        // weak certificate: multipliers read off the active pattern of the best iterate
        auto m = linear_margins(data, hs, best.w);
        std::vector<double> alpha(hs.idx.size());
        for (std::size_t r = 0; r < alpha.size(); ++r) {
            double rr = hs.y[r] * (m[r] + best.b);
            alpha[r] = rr < 1.0 ? hs.c[r] : 0.0;
        }
        balance(alpha, hs);
        residual = std::max(0.0, best.objective - dual_value(data, hs, alpha, lambda));
    }

    LinearFit fit;
    fit.model.w = best.w;
    fit.model.b = best.b;
    fit.scores = margins(fit.model, data);
    fit.objective = best.objective;
    fit.residual = residual;
    fit.iterations = std::min(k, cfg.iterations);
    return fit;
}

}  // namespace fairsel
