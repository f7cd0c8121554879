#include "fairsel/train.hpp"

#include "hinge.hpp"

#include <cmath>

namespace fairsel {

namespace {

void check_onehot(const Dataset& data, const OneHotSelection& z) {
    if (z.size() != data.size()) throw InvalidInput("selection length mismatch");
    if (static_cast<int>(z.classes) != data.class_count) throw InvalidInput("selection class count mismatch");
    for (int h : z.hot)
        if (h < 0 || h >= data.class_count) throw InvalidInput("malformed one-hot row");
}

double loss(const Dataset& data, const OneHotSelection& z, const MulticlassModel& m, double lambda) {
    const std::size_t K = m.classes();
    const double inv_n = 1.0 / static_cast<double>(data.size());
    std::vector<double> f(K);
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto y = static_cast<std::size_t>(data.class_index(i));
        for (std::size_t j = 0; j < K; ++j) f[j] = m.decision(j, data.x(i));
        for (std::size_t j = 0; j < K; ++j) {
            if (j == y || z.at(i, j)) continue;
            s += inv_n * std::max(0.0, 1.0 - (f[y] - f[j]));
        }
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < K; ++j) reg += squared_norm(m.w.row(j));
    return s + lambda * reg;
}

}  // namespace

double multisvm_objective(const Dataset& data, const OneHotSelection& z, const HyperParams& h,
                          const MulticlassModel& m) {
    check_onehot(data, z);
    return loss(data, z, m, h.lambda);
}

MulticlassFit fit_multisvm_weighted(const Dataset& data, const OneHotSelection& z, const HyperParams& h,
                                    const TrainConfig& cfg, const MulticlassModel* warm) {
    cfg.validate();
    check_onehot(data, z);
    const auto K = static_cast<std::size_t>(data.class_count);
    const std::size_t n = data.dim(), N = data.size();
    const double lambda = h.lambda;
    const double inv_n = 1.0 / static_cast<double>(N);

    MulticlassModel cur;
    cur.w = Matrix(K, n);
    cur.b.assign(K, 0.0);
    if (warm) {
        if (warm->w.rows != K || warm->w.cols != n) throw InvalidInput("warm start shape mismatch");
        cur = *warm;
    }
    MulticlassModel best = cur;
    double best_obj = loss(data, z, cur, lambda);

    Matrix gw(K, n);
    std::vector<double> gb(K), f(K);
    int k = 1;
    for (; k <= cfg.iterations; ++k) {
        for (std::size_t j = 0; j < K; ++j)
            for (std::size_t q = 0; q < n; ++q) gw(j, q) = 2.0 * lambda * cur.w(j, q);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            auto y = static_cast<std::size_t>(data.class_index(i));
            auto x = data.x(i);
            for (std::size_t j = 0; j < K; ++j) f[j] = cur.decision(j, x);
            for (std::size_t j = 0; j < K; ++j) {
                if (j == y || z.at(i, j)) continue;
                if (1.0 - (f[y] - f[j]) <= 0.0) continue;
                for (std::size_t q = 0; q < n; ++q) {
                    gw(y, q) -= inv_n * x[q];
                    gw(j, q) += inv_n * x[q];
                }
                gb[y] -= inv_n;
                gb[j] += inv_n;
            }
        }
        double eta = detail::step_size(k, lambda, cfg.base_rate, static_cast<int>(cfg.schedule));
        double eta_b = cfg.base_rate / std::sqrt(static_cast<double>(k));
        for (std::size_t j = 0; j < K; ++j) {
            for (std::size_t q = 0; q < n; ++q) cur.w(j, q) -= eta * gw(j, q);
            cur.b[j] -= eta_b * gb[j];
        }
        double obj = loss(data, z, cur, lambda);
        if (obj < best_obj) {
            best_obj = obj;
            best = cur;
        }
        if (best_obj <= 0.0) break;
    }

    MulticlassFit fit;
    fit.model = best;
    fit.scores = margins(best, data);
    fit.objective = best_obj;
    fit.residual = best_obj <= 0.0 ? 0.0 : kUncertified;
    fit.iterations = std::min(k, cfg.iterations);
    return fit;
}

}  // namespace fairsel
