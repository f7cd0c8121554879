#include "fairsel/train.hpp"

#include "hinge.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fairsel {

using detail::HingeSet;

double KernelModel::decision(std::span<const double> x) const {
    double f = b;
    for (std::size_t s = 0; s < coef.size(); ++s)
        if (coef[s] != 0.0) f += coef[s] * kernel(points.row(s), x);
    return f;
}

std::vector<int> KernelModel::predict(const Matrix& features) const {
    if (features.cols != points.cols) throw InvalidInput("dimension mismatch");
    std::vector<int> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) out[i] = decision(features.row(i)) >= 0.0 ? 1 : -1;
    return out;
}

Matrix gram_matrix(const Kernel& k, const Matrix& points) {
    Matrix g(points.rows, points.rows);
    for (std::size_t i = 0; i < points.rows; ++i)
        for (std::size_t j = i; j < points.rows; ++j) g(i, j) = g(j, i) = k(points.row(i), points.row(j));
    return g;
}

namespace {

std::vector<double> gram_times(const Matrix& K, const std::vector<double>& beta) {
    std::vector<double> f(K.rows, 0.0);
    for (std::size_t s = 0; s < beta.size(); ++s) {
        if (beta[s] == 0.0) continue;
        auto col = K.row(s);  // symmetric
        for (std::size_t i = 0; i < K.rows; ++i) f[i] += beta[s] * col[i];
    }
    return f;
}

double quad(const std::vector<double>& beta, const std::vector<double>& f) {
    double q = 0.0;
    for (std::size_t s = 0; s < beta.size(); ++s) q += beta[s] * f[s];
    return q;
}

std::vector<double> selected_values(const std::vector<double>& f, const HingeSet& hs) {
    std::vector<double> m(hs.idx.size());
    for (std::size_t r = 0; r < hs.idx.size(); ++r) m[r] = f[hs.idx[r]];
    return m;
}

struct State {
    std::vector<double> beta;
    double b = 0.0;
    double objective = 0.0;
};

struct Polished {
    State st;
    double residual = kUncertified;
    bool ok = false;
};

Polished polish_kernel(const Matrix& K, const HingeSet& hs, const State& from, double lambda) {
    Polished out;
    if (!(lambda > 0.0)) return out;
    const std::size_t s = hs.idx.size(), N = K.rows;
    auto f = gram_times(K, from.beta);
    std::vector<double> r(s);
    for (std::size_t q = 0; q < s; ++q) r[q] = hs.y[q] * (f[hs.idx[q]] + from.b);
    const double inv = 1.0 / (2.0 * lambda);

    for (double tol : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
        std::vector<std::size_t> A, Z, I;
        for (std::size_t q = 0; q < s; ++q) {
            if (r[q] < 1.0 - tol) A.push_back(q);
            else if (r[q] > 1.0 + tol) I.push_back(q);
            else Z.push_back(q);
        }
        double cy = 0.0, csum = 0.0;
        for (auto q : A) {
            cy += hs.c[q] * hs.y[q];
            csum += hs.c[q];
        }
        State st;
        st.beta.assign(N, 0.0);
        for (auto q : A) st.beta[hs.idx[q]] = hs.c[q] * hs.y[q] * inv;
        std::vector<double> alphaZ(Z.size(), 0.0);
        if (Z.empty()) {
            if (std::fabs(cy) > 1e-12 * std::max(1.0, csum)) continue;
            st.b = from.b;
        } else {
            const auto dim = static_cast<Eigen::Index>(Z.size() + 1);
            Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            const auto bi = static_cast<Eigen::Index>(Z.size());
            for (std::size_t j = 0; j < Z.size(); ++j) {
                auto jj = static_cast<Eigen::Index>(j);
                std::size_t pj = hs.idx[Z[j]];
                double base = 0.0;
                for (auto q : A) base += hs.c[q] * hs.y[q] * K(pj, hs.idx[q]) * inv;
                for (std::size_t l = 0; l < Z.size(); ++l)
                    M(jj, static_cast<Eigen::Index>(l)) = hs.y[Z[j]] * hs.y[Z[l]] * K(pj, hs.idx[Z[l]]) * inv;
                M(jj, bi) = hs.y[Z[j]];
                rhs(jj) = 1.0 - hs.y[Z[j]] * base;
                M(bi, jj) = hs.y[Z[j]];
            }
            rhs(bi) = -cy;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (lu.rank() < dim) continue;
            Eigen::VectorXd sol = lu.solve(rhs);
            if (!sol.allFinite()) continue;
            for (std::size_t j = 0; j < Z.size(); ++j) alphaZ[j] = sol(static_cast<Eigen::Index>(j));
            st.b = sol(bi);
        }
        bool ok = true;
        std::vector<double> alpha(s, 0.0);
        for (auto q : A) alpha[q] = hs.c[q];
        for (std::size_t j = 0; j < Z.size(); ++j) {
            double a = alphaZ[j], cap = hs.c[Z[j]];
            if (a < -1e-9 * cap || a > cap * (1.0 + 1e-9)) ok = false;
            alpha[Z[j]] = std::clamp(a, 0.0, cap);
            st.beta[hs.idx[Z[j]]] = alpha[Z[j]] * hs.y[Z[j]] * inv;
        }
        if (!ok) continue;
        auto f2 = gram_times(K, st.beta);
        for (auto q : A)
            if (hs.y[q] * (f2[hs.idx[q]] + st.b) > 1.0 + 1e-9) ok = false;
        for (auto q : I)
            if (hs.y[q] * (f2[hs.idx[q]] + st.b) < 1.0 - 1e-9) ok = false;
        if (!ok) continue;
        double reg = quad(st.beta, f2);
        st.objective = detail::hinge_sum(selected_values(f2, hs), st.b, hs) + lambda * reg;
        double asum = 0.0;
        for (double a : alpha) asum += a;
        double dual = asum - lambda * reg;
        out.st = st;
        out.residual = std::max(0.0, st.objective - dual);
        out.ok = true;
        return out;
    }
    return out;
}

}  // namespace

double kernel_objective(const Dataset& data, const Selection& z, const HyperParams& h, const KernelModel& m,
                        const Matrix& gram, Weights weights) {
    auto hs = detail::make_hinge_set(data, z, weights);
    auto f = gram_times(gram, m.coef);
    return detail::hinge_sum(selected_values(f, hs), m.b, hs) + h.lambda * quad(m.coef, f);
}

KernelFit fit_kernel_svm(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                         Weights weights, const KernelModel* warm, const Matrix* gram) {
    if (!data.is_binary()) throw InvalidInput("binary labels required");
    cfg.validate();
    const std::size_t N = data.size();
    const auto hs = detail::make_hinge_set(data, z, weights);
    if (hs.idx.empty()) throw DegenerateSelection("empty selection");
    bool has_pos = false, has_neg = false;
    for (double y : hs.y) (y > 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw DegenerateSelection("selection holds a single class");

    Matrix own;
    if (!gram) {
        own = gram_matrix(cfg.kernel, data.features);
        gram = &own;
    }
    const Matrix& K = *gram;
    if (K.rows != N || K.cols != N) throw InvalidInput("gram matrix size mismatch");
    const double lambda = h.lambda;

    State cur;
    cur.beta.assign(N, 0.0);
    if (warm) {
        if (warm->coef.size() != N) throw InvalidInput("warm start was trained on different data");
        cur.beta = warm->coef;
        cur.b = warm->b;
    }
    auto f = gram_times(K, cur.beta);
    State best = cur;
    best.objective = detail::hinge_sum(selected_values(f, hs), cur.b, hs) + lambda * quad(cur.beta, f);

    double residual = kUncertified;
    int next_polish = 16;
    int k = 1;
    for (; k <= cfg.iterations + 1; ++k) {
        auto m = selected_values(f, hs);
        auto ic = detail::best_intercept(m, hs);
        double obj = detail::hinge_sum(m, ic.b, hs) + lambda * quad(cur.beta, f);
        if (obj < best.objective) {
            best.beta = cur.beta;
            best.b = ic.b;
            best.objective = obj;
        }
        if (best.objective <= 0.0) {
            residual = 0.0;
            break;
        }
        if (cfg.polish && (k == next_polish || k == cfg.iterations + 1)) {
            next_polish *= 2;
            auto p = polish_kernel(K, hs, best, lambda);
            if (p.ok && p.st.objective <= best.objective + 1e-12 * std::max(1.0, best.objective)) {
                best = p.st;
                residual = p.residual;
                if (residual <= 1e-12 * std::max(1.0, best.objective)) break;
            }
        }
        if (k == cfg.iterations + 1) break;

        double eta = detail::step_size(k, lambda, cfg.base_rate, static_cast<int>(cfg.schedule));
        double shrink = 1.0 - 2.0 * lambda * eta;
        if (shrink != 1.0) {
            for (auto& v : cur.beta) v *= shrink;
            for (auto& v : f) v *= shrink;
        }
        for (std::size_t r = 0; r < hs.idx.size(); ++r) {
            double a = detail::active_factor(m[r], hs.y[r], ic);
            if (a == 0.0) continue;
            double d = eta * a * hs.c[r] * hs.y[r];
            std::size_t p = hs.idx[r];
            cur.beta[p] += d;
            auto col = K.row(p);
            for (std::size_t i = 0; i < N; ++i) f[i] += d * col[i];
        }
    }

    KernelFit fit;
    fit.model.kernel = cfg.kernel;
    fit.model.points = data.features;
    fit.model.coef = best.beta;
    fit.model.b = best.b;
    auto fb = gram_times(K, best.beta);
    fit.scores.direction = Direction::CorrectWhenAtMost;
    fit.scores.values.resize(N);
    for (std::size_t i = 0; i < N; ++i) fit.scores.values[i] = std::max(0.0, 1.0 - data.labels[i] * (fb[i] + best.b));
    fit.objective = best.objective;
    fit.residual = residual;
    fit.iterations = std::min(k, cfg.iterations);
    return fit;
}

}  // namespace fairsel
