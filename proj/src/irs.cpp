#include "fairsel/irs.hpp"

#include "fairsel/fairness.hpp"
#include "fairsel/subselect.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace fairsel {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::SVM: return "svm";
        case ModelKind::Logistic: return "logreg";
        case ModelKind::Kernel: return "kernel";
        case ModelKind::Multiclass: return "multiclass";
        case ModelKind::BlackBox: return "blackbox";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "svm") return ModelKind::SVM;
    if (s == "logreg" || s == "logistic") return ModelKind::Logistic;
    if (s == "kernel" || s == "ksvm") return ModelKind::Kernel;
    if (s == "multiclass" || s == "msvm") return ModelKind::Multiclass;
    if (s == "blackbox") return ModelKind::BlackBox;
    throw InvalidInput("unknown model kind: " + s);
}

double objective_h(const Scores& u, const Selection& z, const FairnessSpec& spec, const HyperParams& h, double reg) {
    auto cost = adjusted_costs(u, spec, h.t);
    return selection_objective(cost, z, spec, h.rho) + reg;
}

GapReport approximation_gap(double h_hat, double v_star, const Selection& z_hat, const Selection& z_star, double m_u,
                            std::size_t n) {
    if (z_hat.size() != z_star.size() || z_hat.size() != n) throw InvalidInput("selection lengths mismatch");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < n; ++i) diff += (z_hat.z[i] != z_star.z[i]);
    GapReport g;
    g.bound = v_star + m_u / static_cast<double>(n) * static_cast<double>(diff);
    g.holds = v_star - 1e-9 <= h_hat && h_hat <= g.bound + 1e-9;
    return g;
}

std::vector<int> predict(const FittedModel& m, const Matrix& features, const Dataset& reference) {
    switch (m.kind) {
        case ModelKind::SVM:
        case ModelKind::Logistic: return predict(m.linear, features);
        case ModelKind::Kernel: return m.kernel.predict(features);
        case ModelKind::Multiclass: {
            auto p = predict(m.multi, features);
            for (auto& v : p) v = reference.label_of_class(v - 1);
            return p;
        }
        case ModelKind::BlackBox: break;
    }
    throw InvalidInput("black-box models only score their training points");
}

namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == labels[i];
    return static_cast<double>(ok) / static_cast<double>(pred.size());
}

/// One binary learner per model kind; refit throws DegenerateSelection.
class Learner {
public:
    virtual ~Learner() = default;
    virtual void refit(const Selection& z) = 0;
    virtual std::vector<int> predictions() const = 0;
    virtual FittedModel model() const = 0;

    Scores scores;
    double reg = 0.0;
    double residual = 0.0;
};

class LinearLearner : public Learner {
public:
    LinearLearner(ModelKind kind, const Dataset& data, const HyperParams& h, const TrainConfig& cfg,
                  std::vector<double> weights, const FittedModel* init)
        : kind_(kind), data_(data), h_(h), cfg_(cfg), weights_(std::move(weights)) {
        if (init) {
            if (init->kind != kind) throw InvalidInput("warm start model kind mismatch");
            set(init->linear, 0.0);
        } else {
            Selection all(data.size(), 1);
            fit(all, nullptr);
        }
    }

    void refit(const Selection& z) override {
        LinearModel prev = model_;
        fit(z, &prev);
    }

    std::vector<int> predictions() const override { return predict(model_, data_.features); }

    FittedModel model() const override {
        FittedModel m;
        m.kind = kind_;
        m.linear = model_;
        return m;
    }

private:
    void set(const LinearModel& m, double res) {
        model_ = m;
        scores = kind_ == ModelKind::SVM ? margins(m, data_) : log_likelihoods(m, data_);
        reg = h_.lambda * squared_norm(m.w);
        residual = res;
    }

    void fit(const Selection& z, const LinearModel* warm) {
        auto f = kind_ == ModelKind::SVM ? fit_svm_weighted(data_, z, h_, cfg_, weights_, warm)
                                         : fit_logreg_weighted(data_, z, h_, cfg_, weights_, warm);
        set(f.model, f.residual);
    }

    ModelKind kind_;
    const Dataset& data_;
    HyperParams h_;
    TrainConfig cfg_;
    std::vector<double> weights_;
    LinearModel model_;
};

class KernelLearner : public Learner {
public:
    KernelLearner(const Dataset& data, const HyperParams& h, const TrainConfig& cfg, std::vector<double> weights,
                  const FittedModel* init)
        : data_(data), h_(h), cfg_(cfg), weights_(std::move(weights)), gram_(gram_matrix(cfg.kernel, data.features)) {
        if (init) {
            if (init->kind != ModelKind::Kernel || init->kernel.coef.size() != data.size())
                throw InvalidInput("warm start kernel model does not match the data");
            model_ = init->kernel;
            refresh(0.0);
        } else {
            Selection all(data.size(), 1);
            auto f = fit_kernel_svm(data_, all, h_, cfg_, weights_, nullptr, &gram_);
            model_ = f.model;
            refresh(f.residual);
        }
    }

    void refit(const Selection& z) override {
        auto f = fit_kernel_svm(data_, z, h_, cfg_, weights_, &model_, &gram_);
        model_ = f.model;
        refresh(f.residual);
    }

    std::vector<int> predictions() const override {
        std::vector<int> p(data_.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = decision_[i] >= 0.0 ? 1 : -1;
        return p;
    }

    FittedModel model() const override {
        FittedModel m;
        m.kind = ModelKind::Kernel;
        m.kernel = model_;
        return m;
    }

private:
    void refresh(double res) {
        const std::size_t N = data_.size();
        decision_.assign(N, model_.b);
        double q = 0.0;
        for (std::size_t s = 0; s < N; ++s) {
            if (model_.coef[s] == 0.0) continue;
            for (std::size_t i = 0; i < N; ++i) decision_[i] += model_.coef[s] * gram_(s, i);
        }
        for (std::size_t s = 0; s < N; ++s) q += model_.coef[s] * (decision_[s] - model_.b);
        scores.direction = Direction::CorrectWhenAtMost;
        scores.values.resize(N);
        for (std::size_t i = 0; i < N; ++i) scores.values[i] = std::max(0.0, 1.0 - data_.labels[i] * decision_[i]);
        reg = h_.lambda * q;
        residual = res;
    }

    const Dataset& data_;
    HyperParams h_;
    TrainConfig cfg_;
    std::vector<double> weights_;
    Matrix gram_;
    KernelModel model_;
    std::vector<double> decision_;
};

class BlackBoxLearner : public Learner {
public:
    BlackBoxLearner(const Dataset& data, Scorer& scorer) : data_(data), scorer_(scorer) {
        std::vector<std::size_t> all(data.size());
        std::iota(all.begin(), all.end(), 0);
        scores = blackbox_scores(scorer_, all, data.size());
    }

    void refit(const Selection& z) override {
        auto idx = z.indices();
        if (idx.empty()) throw DegenerateSelection("empty selection");
        bool pos = false, neg = false;
        for (auto i : idx) (data_.labels[i] > 0 ? pos : neg) = true;
        if (!pos || !neg) throw DegenerateSelection("selection holds a single class");
        scores = blackbox_scores(scorer_, idx, data_.size());
    }

    std::vector<int> predictions() const override {
        std::vector<int> p(data_.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = scores.values[i] >= 0.5 ? data_.labels[i] : -data_.labels[i];
        return p;
    }

    FittedModel model() const override {
        FittedModel m;
        m.kind = ModelKind::BlackBox;
        return m;
    }

private:
    const Dataset& data_;
    Scorer& scorer_;
};

Selection threshold(const Scores& u, double t) {
    Selection z(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        z.z[i] = u.direction == Direction::CorrectWhenAtMost ? u.values[i] <= t : u.values[i] >= t;
    return z;
}

struct Snapshot {
    FittedModel model;
    Selection z;
    Scores scores;
    std::vector<int> pred;
    double objective = 0.0;
    double residual = 0.0;
};

IrsRecord make_record(int k, double H, const std::vector<int>& pred, const Dataset& data, const Selection& z,
                      const FairnessSpec& spec, double residual, double ms) {
    IrsRecord r;
    r.iteration = k;
    r.objective = H;
    r.accuracy = accuracy(pred, data.labels);
    r.fairness = fairness_value(correctness(pred, data.labels), spec);
    r.selection_fairness = fairness_value(z, spec);
    r.selected = z.count();
    r.millis = ms;
    r.inner_residual = residual;
    return r;
}

IrsResult irs_binary(ModelKind kind, const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                     const IrsConfig& cfg, const FittedModel* init) {
    auto t_start = clock_type::now();
    std::unique_ptr<Learner> learner;
    auto weights = accuracy_weights(spec);
    switch (kind) {
        case ModelKind::SVM:
        case ModelKind::Logistic:
            learner = std::make_unique<LinearLearner>(kind, data, h, cfg.train, weights, init);
            break;
        case ModelKind::Kernel: learner = std::make_unique<KernelLearner>(data, h, cfg.train, weights, init); break;
        case ModelKind::BlackBox:
            if (!cfg.scorer) throw InvalidInput("black-box IRS needs a scorer");
            learner = std::make_unique<BlackBoxLearner>(data, *cfg.scorer);
            break;
        case ModelKind::Multiclass: throw InvalidInput("not a binary model kind");
    }

    IrsResult res;
    Selection z = threshold(learner->scores, h.t);
    double H = objective_h(learner->scores, z, spec, h, learner->reg);
    auto pred = learner->predictions();
    res.trace.records.push_back(make_record(0, H, pred, data, z, spec, learner->residual, elapsed_ms(t_start)));
    Snapshot best{learner->model(), z, learner->scores, pred, H, learner->residual};

    res.trace.stop_reason = "max_iter";
    for (int k = 1; k <= h.max_iter; ++k) {
        auto t0 = clock_type::now();
        auto sel = select(learner->scores, spec, h);
        try {
            learner->refit(sel.z);
        } catch (const DegenerateSelection& e) {
            res.trace.degenerate_stop = true;
            res.trace.stop_reason = std::string("degenerate selection: ") + e.what();
            break;
        }
        double Hn = objective_h(learner->scores, sel.z, spec, h, learner->reg);
        pred = learner->predictions();
        res.trace.records.push_back(make_record(k, Hn, pred, data, sel.z, spec, learner->residual, elapsed_ms(t0)));
        double slack = 1e-9 + (std::isfinite(learner->residual) ? learner->residual : 0.0);
        if (Hn > H + slack) ++res.trace.monotone_violations;
        if (Hn < best.objective) {
            best = {learner->model(), sel.z, learner->scores, pred, Hn, learner->residual};
            res.trace.best_iteration = k;
        }
        double improvement = H - Hn;
        H = Hn;
        if (improvement <= h.delta) {
            res.trace.stop_reason = "converged";
            break;
        }
    }
    res.model = best.model;
    res.z = best.z;
    res.scores = best.scores;
    res.train_predictions = best.pred;
    res.objective = best.objective;
    res.residual = best.residual;
    return res;
}

IrsResult irs_multiclass(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, const IrsConfig& cfg,
                         const FittedModel* init) {
    auto t_start = clock_type::now();
    const std::size_t N = data.size();
    const auto K = static_cast<std::size_t>(data.class_count);
    std::vector<int> cls(N);
    for (std::size_t i = 0; i < N; ++i) cls[i] = data.class_index(i);

    auto labels_of = [&](const MulticlassModel& m) {
        auto p = predict(m, data.features);
        for (auto& v : p) v = data.label_of_class(v - 1);
        return p;
    };
    auto reg_of = [&](const MulticlassModel& m) {
        double r = 0.0;
        for (std::size_t j = 0; j < K; ++j) r += squared_norm(m.w.row(j));
        return h.lambda * r;
    };

    MulticlassFit cur;
    if (init) {
        if (init->kind != ModelKind::Multiclass) throw InvalidInput("warm start model kind mismatch");
        cur.model = init->multi;
        cur.scores = margins(cur.model, data);
        cur.residual = 0.0;
    } else {
        OneHotSelection all;
        all.classes = K;
        all.hot = cls;
        cur = fit_multisvm_weighted(data, all, h, cfg.train);
    }

    auto jstar = worst_wrong_class(cur.scores, cls);
    OneHotSelection z;
    z.classes = K;
    z.hot.resize(N);
    for (std::size_t i = 0; i < N; ++i)
        z.hot[i] = cur.scores.values(i, static_cast<std::size_t>(jstar[i])) <= h.t ? cls[i] : jstar[i];

    auto record = [&](int k, double H, const std::vector<int>& pred, const OneHotSelection& zz, double residual,
                      double ms) {
        IrsRecord r;
        r.iteration = k;
        r.objective = H;
        r.accuracy = accuracy(pred, data.labels);
        r.fairness = omr(correctness(pred, data.labels), spec);
        r.selection_fairness = omr_multiclass(zz, cls, spec);
        r.selected = 0;
        for (std::size_t i = 0; i < N; ++i) r.selected += zz.hot[i] == cls[i];
        r.millis = ms;
        r.inner_residual = residual;
        return r;
    };

    IrsResult res;
    double H = multiclass_objective(cur.scores, cls, z, spec, h) + reg_of(cur.model);
    auto pred = labels_of(cur.model);
    res.trace.records.push_back(record(0, H, pred, z, cur.residual, elapsed_ms(t_start)));
    MulticlassFit best = cur;
    OneHotSelection best_z = z;
    double best_h = H;
    std::vector<int> best_pred = pred;

    res.trace.stop_reason = "max_iter";
    for (int k = 1; k <= h.max_iter; ++k) {
        auto t0 = clock_type::now();
        auto sel = select_omr_multiclass(cur.scores, cls, spec, h);
        cur = fit_multisvm_weighted(data, sel.z, h, cfg.train, &cur.model);
        double Hn = multiclass_objective(cur.scores, cls, sel.z, spec, h) + reg_of(cur.model);
        pred = labels_of(cur.model);
        res.trace.records.push_back(record(k, Hn, pred, sel.z, cur.residual, elapsed_ms(t0)));
        double slack = 1e-9 + (std::isfinite(cur.residual) ? cur.residual : 0.0);
        if (Hn > H + slack) ++res.trace.monotone_violations;
        if (Hn < best_h) {
            best = cur;
            best_z = sel.z;
            best_h = Hn;
            best_pred = pred;
            res.trace.best_iteration = k;
        }
        double improvement = H - Hn;
        H = Hn;
        if (improvement <= h.delta) {
            res.trace.stop_reason = "converged";
            break;
        }
    }
    res.model.kind = ModelKind::Multiclass;
    res.model.multi = best.model;
    res.onehot = best_z;
    res.multi_scores = best.scores;
    res.objective = best_h;
    res.residual = best.residual;
    res.train_predictions = best_pred;
    return res;
}

}  // namespace

IrsResult irs_fit(ModelKind kind, const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                  const IrsConfig& cfg, const FittedModel* init) {
    data.validate();
    h.validate();
    spec.require_valid();
    if (spec.n != data.size()) throw InvalidInput("fairness spec does not match the data");
    if (kind == ModelKind::Multiclass) {
        if (spec.kind != FairnessKind::OMR) throw InvalidInput("multiclass IRS supports OMR fairness only");
        return irs_multiclass(data, h, spec, cfg, init);
    }
    if (!data.is_binary()) throw InvalidInput("binary model kinds need binary labels");
    return irs_binary(kind, data, h, spec, cfg, init);
}

}  // namespace fairsel
