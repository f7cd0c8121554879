#include "fairsel/fairness.hpp"

#include <cmath>

namespace fairsel {

namespace {

std::size_t ones(const Selection& z, const std::vector<std::size_t>& idx) {
    std::size_t c = 0;
    for (auto i : idx) c += z.z[i];
    return c;
}

void check(const Selection& z, const FairnessSpec& spec) {
    if (z.size() != spec.n) throw InvalidInput("selection length does not match spec");
}

double rate_gap(const Selection& z, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                const char* what) {
    if (a.empty() || b.empty()) throw InvalidInput(std::string("empty subset for ") + what);
    double ra = static_cast<double>(ones(z, a)) / static_cast<double>(a.size());
    double rb = static_cast<double>(ones(z, b)) / static_cast<double>(b.size());
    return std::fabs(ra - rb);
}

}  // namespace

double omr(const Selection& z, const FairnessSpec& spec) {
    check(z, spec);
    return rate_gap(z, spec.d_plus, spec.d_minus, "OMR");
}

double fpr(const Selection& z, const FairnessSpec& spec) {
    check(z, spec);
    return rate_gap(z, spec.d_pm, spec.d_mm, "FPR");
}

double eo(const Selection& z, const FairnessSpec& spec) {
    check(z, spec);
    return rate_gap(z, spec.d_pp, spec.d_mp, "EO");
}

double dp(const Selection& z, const FairnessSpec& spec) {
    check(z, spec);
    if (spec.d_plus.empty() || spec.d_minus.empty()) throw InvalidInput("empty group for DP");
    if (spec.d_pp.size() + spec.d_pm.size() != spec.d_plus.size() ||
        spec.d_mp.size() + spec.d_mm.size() != spec.d_minus.size())
        throw InvalidInput("DP needs binary labels");
    // positive predictions: correct positives plus wrong negatives
    double pp = static_cast<double>(ones(z, spec.d_pp) + (spec.d_pm.size() - ones(z, spec.d_pm)));
    double pm = static_cast<double>(ones(z, spec.d_mp) + (spec.d_mm.size() - ones(z, spec.d_mm)));
    return std::fabs(pp / static_cast<double>(spec.d_plus.size()) - pm / static_cast<double>(spec.d_minus.size()));
}

F1Fraction f1_fraction(const Selection& z, const FairnessSpec& spec) {
    check(z, spec);
    if (spec.n_plus.empty()) throw InvalidInput("F1 undefined without positive labels");
    auto n = static_cast<long long>(spec.n);
    auto sel = static_cast<long long>(z.count());
    auto sp = static_cast<long long>(ones(z, spec.n_plus));
    auto sm = static_cast<long long>(ones(z, spec.n_minus));
    return {n - sel, n + sp - sm};
}

double f1_complement(const Selection& z, const FairnessSpec& spec) {
    auto f = f1_fraction(z, spec);
    return static_cast<double>(f.numerator) / static_cast<double>(f.denominator);
}

double omr_multiclass(const OneHotSelection& z, std::span<const int> true_class, const FairnessSpec& spec) {
    if (z.size() != spec.n || true_class.size() != spec.n) throw InvalidInput("length mismatch");
    Selection diag(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        if (z.hot[i] < 0 || z.hot[i] >= static_cast<int>(z.classes)) throw InvalidInput("malformed one-hot row");
        diag.z[i] = z.hot[i] == true_class[i] ? 1 : 0;
    }
    return omr(diag, spec);
}

double fairness_value(const Selection& z, const FairnessSpec& spec) {
    switch (spec.kind) {
        case FairnessKind::OMR: return omr(z, spec);
        case FairnessKind::FPR: return fpr(z, spec);
        case FairnessKind::EO: return eo(z, spec);
        case FairnessKind::DP: return dp(z, spec);
        case FairnessKind::F1Complement: return f1_complement(z, spec);
    }
    throw InvalidInput("unknown fairness kind");
}

Selection correctness(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size()) throw InvalidInput("length mismatch");
    Selection z(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) z.z[i] = predicted[i] == labels[i] ? 1 : 0;
    return z;
}

}  // namespace fairsel
