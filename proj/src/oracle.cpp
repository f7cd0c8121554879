#include "fairsel/oracle.hpp"

#include "fairsel/fairness.hpp"
#include "fairsel/subselect.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace fairsel {

namespace {

struct Candidate {
    double value = std::numeric_limits<double>::infinity();
    double residual = 0.0;
    std::vector<int> key;
    FittedModel model;
    bool set = false;

    bool better_than(const Candidate& o) const {
        if (!o.set) return set;
        if (!set) return false;
        if (value != o.value) return value < o.value;
        return key < o.key;
    }
};

double worse_residual(double a, double b) { return std::isnan(a) || std::isnan(b) ? kUncertified : std::max(a, b); }

template <class Eval>
Candidate enumerate(std::size_t total, unsigned threads, Eval eval, double& max_residual) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(total, 64))));
    std::vector<Candidate> best(threads);
    std::vector<double> res(threads, 0.0);
    auto work = [&](unsigned t) {
        for (std::size_t k = t; k < total; k += threads) {
            Candidate c = eval(k);
            res[t] = worse_residual(res[t], c.residual);
            if (c.better_than(best[t])) best[t] = std::move(c);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }
    Candidate out;
    max_residual = 0.0;
    for (unsigned t = 0; t < threads; ++t) {
        max_residual = worse_residual(max_residual, res[t]);
        if (best[t].better_than(out)) out = std::move(best[t]);
    }
    return out;
}

Selection mask_selection(std::size_t mask, std::size_t N) {
    Selection z(N);
    for (std::size_t i = 0; i < N; ++i) z.z[i] = (mask >> i) & 1u;
    return z;
}

double quad_form(const Matrix& K, const std::vector<double>& c) {
    double q = 0.0;
    for (std::size_t s = 0; s < c.size(); ++s) {
        if (c[s] == 0.0) continue;
        for (std::size_t r = 0; r < c.size(); ++r) q += c[s] * c[r] * K(s, r);
    }
    return q;
}

Scores kernel_hinge(const KernelModel& m, const Matrix& K, const Dataset& data) {
    const std::size_t N = data.size();
    Scores s;
    s.direction = Direction::CorrectWhenAtMost;
    s.values.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        double f = m.b;
        for (std::size_t r = 0; r < N; ++r) f += m.coef[r] * K(r, i);
        s.values[i] = std::max(0.0, 1.0 - data.labels[i] * f);
    }
    return s;
}

Candidate eval_binary(ModelKind kind, const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                      const TrainConfig& cfg, const std::vector<double>& weights, const Matrix* gram, std::size_t mask) {
    const std::size_t N = data.size();
    Selection z = mask_selection(mask, N);
    Candidate c;
    c.set = true;
    c.key.assign(z.z.begin(), z.z.end());
    c.model.kind = kind;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < N; ++i)
        if (z.z[i]) (data.labels[i] > 0 ? pos : neg) = true;

    Scores u;
    double reg = 0.0;
    switch (kind) {
        case ModelKind::SVM:
        case ModelKind::Logistic: {
            if (!pos && !neg) {
                c.model.linear.w.assign(data.dim(), 0.0);
                u = kind == ModelKind::SVM ? margins(c.model.linear, data) : log_likelihoods(c.model.linear, data);
                break;
            }
            auto f = kind == ModelKind::SVM ? fit_svm_weighted(data, z, h, cfg, weights)
                                            : fit_logreg_weighted(data, z, h, cfg, weights);
            c.model.linear = f.model;
            u = f.scores;
            reg = h.lambda * squared_norm(f.model.w);
            c.residual = f.residual;
            break;
        }
        case ModelKind::Kernel: {
            if (!(pos && neg)) {
                // the hinge terms vanish with zero coefficients and b pushed to the selected side
                c.model.kernel.kernel = cfg.kernel;
                c.model.kernel.points = data.features;
                c.model.kernel.coef.assign(N, 0.0);
                c.model.kernel.b = pos ? 1.0 : (neg ? -1.0 : 0.0);
                u = kernel_hinge(c.model.kernel, *gram, data);
                break;
            }
            auto f = fit_kernel_svm(data, z, h, cfg, weights, nullptr, gram);
            c.model.kernel = f.model;
            u = kernel_hinge(f.model, *gram, data);
            reg = h.lambda * quad_form(*gram, f.model.coef);
            c.residual = f.residual;
            break;
        }
        default: throw InvalidInput("unsupported oracle model kind");
    }
    c.value = objective_h(u, z, spec, h, reg);
    return c;
}

}  // namespace

OracleResult exact_solve_tiny(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, ModelKind kind,
                              const TrainConfig& cfg, unsigned threads) {
    data.validate();
    h.validate();
    spec.require_valid();
    if (spec.n != data.size()) throw InvalidInput("fairness spec does not match the data");
    if (kind == ModelKind::BlackBox) throw InvalidInput("the oracle cannot enumerate black-box models");

    TrainConfig big = cfg;
    big.iterations = cfg.iterations * 100;
    big.validate();
    const std::size_t N = data.size();
    OracleResult out;

    if (kind == ModelKind::Multiclass) {
        if (spec.kind != FairnessKind::OMR) throw InvalidInput("multiclass oracle supports OMR only");
        const auto K = static_cast<std::size_t>(data.class_count);
        if (N > 6 || K > 3) throw InvalidInput("multiclass oracle is capped at N <= 6, K <= 3");
        std::vector<int> cls(N);
        for (std::size_t i = 0; i < N; ++i) cls[i] = data.class_index(i);
        std::size_t total = 1;
        for (std::size_t i = 0; i < N; ++i) total *= K;
        auto eval = [&](std::size_t code) {
            OneHotSelection z;
            z.classes = K;
            z.hot.resize(N);
            for (std::size_t i = 0; i < N; ++i) {
                z.hot[i] = static_cast<int>(code % K);
                code /= K;
            }
            auto f = fit_multisvm_weighted(data, z, h, big);
            double reg = 0.0;
            for (std::size_t j = 0; j < K; ++j) reg += squared_norm(f.model.w.row(j));
            Candidate c;
            c.set = true;
            c.key = z.hot;
            c.model.kind = ModelKind::Multiclass;
            c.model.multi = f.model;
            c.residual = f.residual;
            c.value = multiclass_objective(f.scores, cls, z, spec, h) + h.lambda * reg;
            return c;
        };
        double res = 0.0;
        auto best = enumerate(total, threads, eval, res);
        out.model = best.model;
        out.onehot.classes = K;
        out.onehot.hot = best.key;
        out.value = best.value;
        out.residual = res;
        out.enumerated = total;
        return out;
    }

    if (!data.is_binary()) throw InvalidInput("binary model kinds need binary labels");
    if (N > 16) throw InvalidInput("binary oracle is capped at N <= 16");
    auto weights = accuracy_weights(spec);
    Matrix gram;
    if (kind == ModelKind::Kernel) gram = gram_matrix(cfg.kernel, data.features);
    const std::size_t total = std::size_t{1} << N;
    auto eval = [&](std::size_t mask) { return eval_binary(kind, data, h, spec, big, weights, &gram, mask); };
    double res = 0.0;
    auto best = enumerate(total, threads, eval, res);
    out.model = best.model;
    out.z.z.assign(best.key.begin(), best.key.end());
    out.value = best.value;
    out.residual = res;
    out.enumerated = total;
    return out;
}

}  // namespace fairsel
