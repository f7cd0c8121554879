#include "fairsel/core.hpp"

#include <algorithm>
#include <cmath>

namespace fairsel {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

int Dataset::class_index(std::size_t i) const {
    if (is_binary()) return labels[i] == 1 ? 0 : 1;
    return labels[i] - 1;
}

int Dataset::label_of_class(int j) const {
    if (is_binary()) return j == 0 ? 1 : -1;
    return j + 1;
}

void Dataset::validate() const {
    const std::size_t n = labels.size();
    if (n < 2) throw InvalidInput("dataset needs at least two points");
    if (features.rows != n || groups.size() != n) throw InvalidInput("dataset field lengths disagree");
    if (features.cols < 1) throw InvalidInput("dataset needs at least one feature");
    if (class_count < 2) throw InvalidInput("class_count must be at least 2");
    for (double v : features.values)
        if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");
    for (std::size_t i = 0; i < n; ++i) {
        int y = labels[i];
        bool ok = is_binary() ? (y == 1 || y == -1) : (y >= 1 && y <= class_count);
        if (!ok) throw InvalidInput("label out of range at row " + std::to_string(i));
        if (groups[i] != 1 && groups[i] != -1) throw InvalidInput("group must be -1 or +1");
    }
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
    Dataset out;
    out.class_count = class_count;
    out.features = Matrix(idx.size(), features.cols);
    out.labels.reserve(idx.size());
    out.groups.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        auto src = features.row(idx[r]);
        std::copy(src.begin(), src.end(), out.features.row(r).begin());
        out.labels.push_back(labels[idx[r]]);
        out.groups.push_back(groups[idx[r]]);
    }
    return out;
}

double Dataset::max_row_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < features.rows; ++i) m = std::max(m, std::sqrt(squared_norm(features.row(i))));
    return m;
}

void HyperParams::validate() const {
    if (!std::isfinite(t)) throw InvalidInput("t must be finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("lambda must be >= 0");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw InvalidInput("rho must be >= 0");
    if (!(delta > 0.0)) throw InvalidInput("delta must be > 0");
    if (max_iter < 1) throw InvalidInput("max_iter must be positive");
}

double LinearModel::decision(std::span<const double> x) const {
    if (x.size() != w.size()) throw InvalidInput("dimension mismatch");
    return dot(w, x) + b;
}

double MulticlassModel::decision(std::size_t j, std::span<const double> x) const {
    if (x.size() != w.cols) throw InvalidInput("dimension mismatch");
    return dot(w.row(j), x) + b[j];
}

std::size_t Selection::count() const {
    std::size_t c = 0;
    for (auto v : z) c += v;
    return c;
}

std::vector<std::size_t> Selection::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i]) out.push_back(i);
    return out;
}

OneHotSelection OneHotSelection::from_matrix(const Matrix& z) {
    OneHotSelection s;
    s.classes = z.cols;
    s.hot.resize(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        int hot = -1;
        for (std::size_t j = 0; j < z.cols; ++j) {
            double v = z(i, j);
            if (v == 1.0) {
                if (hot >= 0) throw InvalidInput("one-hot row " + std::to_string(i) + " has several ones");
                hot = static_cast<int>(j);
            } else if (v != 0.0) {
                throw InvalidInput("one-hot entries must be 0 or 1");
            }
        }
        if (hot < 0) throw InvalidInput("one-hot row " + std::to_string(i) + " has no one");
        s.hot[i] = hot;
    }
    return s;
}

Matrix OneHotSelection::to_matrix() const {
    Matrix m(hot.size(), classes);
    for (std::size_t i = 0; i < hot.size(); ++i) m(i, static_cast<std::size_t>(hot[i])) = 1.0;
    return m;
}

std::string to_string(FairnessKind k) {
    switch (k) {
        case FairnessKind::OMR: return "omr";
        case FairnessKind::FPR: return "fpr";
        case FairnessKind::EO: return "eo";
        case FairnessKind::DP: return "dp";
        case FairnessKind::F1Complement: return "f1";
    }
    return "?";
}

FairnessKind parse_fairness_kind(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "omr") return FairnessKind::OMR;
    if (l == "fpr") return FairnessKind::FPR;
    if (l == "eo") return FairnessKind::EO;
    if (l == "dp") return FairnessKind::DP;
    if (l == "f1" || l == "f1complement") return FairnessKind::F1Complement;
    throw InvalidInput("unknown fairness kind: " + s);
}

FairnessSpec FairnessSpec::from_tags(std::span<const int> labels, std::span<const int> groups, FairnessKind kind) {
    if (labels.size() != groups.size()) throw InvalidInput("labels and groups differ in length");
    FairnessSpec s;
    s.kind = kind;
    s.n = labels.size();
    bool binary = std::all_of(labels.begin(), labels.end(), [](int y) { return y == 1 || y == -1; });
    for (std::size_t i = 0; i < s.n; ++i) {
        bool gp = groups[i] == 1;
        (gp ? s.d_plus : s.d_minus).push_back(i);
        if (!binary) continue;
        bool yp = labels[i] == 1;
        (yp ? s.n_plus : s.n_minus).push_back(i);
        if (gp) (yp ? s.d_pp : s.d_pm).push_back(i);
        else (yp ? s.d_mp : s.d_mm).push_back(i);
    }
    return s;
}

FairnessSpec FairnessSpec::build(const Dataset& data, FairnessKind kind) {
    if (!data.is_binary() && kind != FairnessKind::OMR)
        throw InvalidInput("multiclass data supports OMR fairness only");
    auto s = from_tags(data.labels, data.groups, kind);
    s.require_valid();
    return s;
}

void FairnessSpec::require_valid() const {
    auto need = [](const std::vector<std::size_t>& v, const char* what) {
        if (v.empty()) throw InvalidInput(std::string("empty index set ") + what);
    };
    switch (kind) {
        case FairnessKind::OMR:
        case FairnessKind::DP:
            need(d_plus, "D+");
            need(d_minus, "D-");
            break;
        case FairnessKind::FPR:
            need(d_pm, "D+-");
            need(d_mm, "D--");
            break;
        case FairnessKind::EO:
            need(d_pp, "D++");
            need(d_mp, "D-+");
            break;
        case FairnessKind::F1Complement:
            need(n_plus, "N+");
            break;
    }
}

std::vector<int> predict(const LinearModel& model, const Matrix& features) {
    if (features.cols != model.w.size()) throw InvalidInput("dimension mismatch");
    std::vector<int> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) out[i] = model.decision(features.row(i)) >= 0.0 ? 1 : -1;
    return out;
}

std::vector<int> predict(const MulticlassModel& model, const Matrix& features) {
    if (features.cols != model.w.cols) throw InvalidInput("dimension mismatch");
    std::vector<int> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) {
        std::size_t best = 0;
        double bv = model.decision(0, features.row(i));
        for (std::size_t j = 1; j < model.classes(); ++j) {
            double v = model.decision(j, features.row(i));
            if (v > bv) {
                bv = v;
                best = j;
            }
        }
        out[i] = static_cast<int>(best) + 1;
    }
    return out;
}

Scores margins(const LinearModel& model, const Dataset& data) {
    if (!data.is_binary()) throw InvalidInput("margins need binary labels");
    Scores s;
    s.direction = Direction::CorrectWhenAtMost;
    s.values.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        s.values[i] = std::max(0.0, 1.0 - data.labels[i] * model.decision(data.x(i)));
    return s;
}

MultiScores margins(const MulticlassModel& model, const Dataset& data) {
    const std::size_t K = model.classes();
    if (static_cast<int>(K) != data.class_count) throw InvalidInput("class count mismatch");
    MultiScores s;
    s.values = Matrix(data.size(), K);
    std::vector<double> f(K);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < K; ++j) f[j] = model.decision(j, data.x(i));
        auto y = static_cast<std::size_t>(data.class_index(i));
        for (std::size_t j = 0; j < K; ++j)
            if (j != y) s.values(i, j) = std::max(0.0, 1.0 - (f[y] - f[j]));
    }
    return s;
}

}  // namespace fairsel
