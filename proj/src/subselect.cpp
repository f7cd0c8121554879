#include "fairsel/subselect.hpp"

#include "fairsel/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Keyed {
    double v;
    std::size_t i;
};

/// Members of `idx` sorted by (cost, index) with prefix sums of the sorted costs.
struct SortedGroup {
    std::vector<std::size_t> order;
    std::vector<double> prefix;
};

SortedGroup sort_group(std::span<const double> cost, const std::vector<std::size_t>& idx) {
    std::vector<Keyed> k(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) k[r] = {cost[idx[r]], idx[r]};
    std::sort(k.begin(), k.end(), [](const Keyed& a, const Keyed& b) { return a.v < b.v || (a.v == b.v && a.i < b.i); });
    SortedGroup g;
    g.order.resize(k.size());
    g.prefix.resize(k.size() + 1);
    g.prefix[0] = 0.0;
    for (std::size_t r = 0; r < k.size(); ++r) {
        g.order[r] = k[r].i;
        g.prefix[r + 1] = g.prefix[r] + k[r].v;
    }
    return g;
}

std::size_t count_below(const SortedGroup& g, std::span<const double> cost, double shift) {
    // sorted ascending, so the items with cost + shift < 0 form a prefix
    std::size_t lo = 0, hi = g.order.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (cost[g.order[mid]] + shift < 0.0) lo = mid + 1;
        else hi = mid;
    }
    return lo;
}

void take_prefix(Selection& z, const SortedGroup& g, std::size_t k) {
    for (std::size_t r = 0; r < k; ++r) z.z[g.order[r]] = 1;
}

void check_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    if (cost.size() != spec.n) throw InvalidInput("cost length does not match spec");
    if (!(rho >= 0.0)) throw InvalidInput("rho must be >= 0");
    for (double c : cost)
        if (!std::isfinite(c)) throw InvalidInput("non-finite cost");
}

/// Two-case enumeration on the pair (A, B) standing in for (D+, D-); writes the chosen prefixes into z.
void pair_select(std::span<const double> cost, const std::vector<std::size_t>& a_idx,
                 const std::vector<std::size_t>& b_idx, double rho, Selection& z) {
    const auto A = sort_group(cost, a_idx);
    const auto B = sort_group(cost, b_idx);
    const long long da = static_cast<long long>(a_idx.size());
    const long long db = static_cast<long long>(b_idx.size());
    const double ra = rho / static_cast<double>(da);
    const double rb = rho / static_cast<double>(db);
    const auto tau1 = static_cast<long long>(count_below(A, cost, -ra));
    const auto tau2 = static_cast<long long>(count_below(A, cost, ra));

    double best = kInf;
    long long best_a = 0, best_b = 0;
    for (long long kb = 0; kb <= db; ++kb) {
        long long fl = kb * da / db;
        long long ce = (kb * da + db - 1) / db;
        long long k1 = std::min(fl, tau1);
        double v1 = A.prefix[k1] - ra * k1 + B.prefix[kb] + rb * kb;
        if (v1 < best) {
            best = v1;
            best_a = k1;
            best_b = kb;
        }
        long long k2 = std::max(ce, tau2);
        double v2 = A.prefix[k2] + ra * k2 + B.prefix[kb] - rb * kb;
        if (v2 < best) {
            best = v2;
            best_a = k2;
            best_b = kb;
        }
    }
    take_prefix(z, A, static_cast<std::size_t>(best_a));
    take_prefix(z, B, static_cast<std::size_t>(best_b));
}

void threshold_outside(std::span<const double> cost, const std::vector<std::size_t>& inside_a,
                       const std::vector<std::size_t>& inside_b, Selection& z) {
    std::vector<std::uint8_t> inside(z.size(), 0);
    for (auto i : inside_a) inside[i] = 1;
    for (auto i : inside_b) inside[i] = 1;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!inside[i] && cost[i] < 0.0) z.z[i] = 1;
}

SelectionOutcome finish(std::span<const double> cost, Selection z, const FairnessSpec& spec, double rho) {
    double v = selection_objective(cost, z, spec, rho);
    return {std::move(z), v};
}

/// g[p] = cheapest way for one group to produce p positive predictions.
struct PositiveTable {
    std::vector<double> cost;
    std::vector<std::size_t> take_pos;  // selected among the label +1 members
    std::vector<std::size_t> take_neg;  // selected among the label -1 members
};

PositiveTable positive_table(const SortedGroup& pos, const SortedGroup& neg) {
    const std::size_t np = pos.order.size(), nm = neg.order.size();
    PositiveTable t;
    t.cost.assign(np + nm + 1, kInf);
    t.take_pos.assign(np + nm + 1, 0);
    t.take_neg.assign(np + nm + 1, 0);
    for (std::size_t p = 0; p <= np + nm; ++p) {
        std::size_t lo = p > nm ? p - nm : 0;
        std::size_t hi = std::min(np, p);
        for (std::size_t a = lo; a <= hi; ++a) {
            std::size_t b = a + nm - p;  // selected negatives; the unselected ones predict +1
            double v = pos.prefix[a] + neg.prefix[b];
            if (v < t.cost[p]) {
                t.cost[p] = v;
                t.take_pos[p] = a;
                t.take_neg[p] = b;
            }
        }
    }
    return t;
}

}  // namespace

std::vector<double> accuracy_weights(const FairnessSpec& spec) {
    std::vector<double> w(spec.n, 1.0 / static_cast<double>(spec.n));
    if (spec.kind == FairnessKind::F1Complement) {
        if (spec.n_plus.empty()) throw InvalidInput("F1 undefined without positive labels");
        for (auto i : spec.n_plus) w[i] = 1.0 / static_cast<double>(spec.n_plus.size());
        for (auto i : spec.n_minus) w[i] = 1.0 / static_cast<double>(spec.n_minus.size());
    }
    return w;
}

std::vector<double> adjusted_costs(const Scores& u, const FairnessSpec& spec, double t) {
    if (u.size() != spec.n) throw InvalidInput("scores length does not match spec");
    auto w = accuracy_weights(spec);
    std::vector<double> c(spec.n);
    const bool at_most = u.direction == Direction::CorrectWhenAtMost;
    for (std::size_t i = 0; i < spec.n; ++i) c[i] = w[i] * (at_most ? u.values[i] - t : t - u.values[i]);
    return c;
}

double selection_objective(std::span<const double> cost, const Selection& z, const FairnessSpec& spec, double rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z.z[i]) s += cost[i];
    return s + rho * fairness_value(z, spec);
}

SelectionOutcome select_omr_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.d_plus.empty() || spec.d_minus.empty()) throw InvalidInput("OMR selection needs both groups");
    Selection z(spec.n);
    pair_select(cost, spec.d_plus, spec.d_minus, rho, z);
    FairnessSpec s = spec;
    s.kind = FairnessKind::OMR;
    return finish(cost, std::move(z), s, rho);
}

SelectionOutcome select_fpr_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.d_pm.empty() || spec.d_mm.empty()) throw InvalidInput("FPR selection needs D+- and D--");
    Selection z(spec.n);
    threshold_outside(cost, spec.d_pm, spec.d_mm, z);
    pair_select(cost, spec.d_pm, spec.d_mm, rho, z);
    FairnessSpec s = spec;
    s.kind = FairnessKind::FPR;
    return finish(cost, std::move(z), s, rho);
}

SelectionOutcome select_eo_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.d_pp.empty() || spec.d_mp.empty()) throw InvalidInput("EO selection needs D++ and D-+");
    Selection z(spec.n);
    threshold_outside(cost, spec.d_pp, spec.d_mp, z);
    pair_select(cost, spec.d_pp, spec.d_mp, rho, z);
    FairnessSpec s = spec;
    s.kind = FairnessKind::EO;
    return finish(cost, std::move(z), s, rho);
}

SelectionOutcome select_dp_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.d_plus.empty() || spec.d_minus.empty()) throw InvalidInput("DP selection needs both groups");
    const auto pp = sort_group(cost, spec.d_pp), pm = sort_group(cost, spec.d_pm);
    const auto mp = sort_group(cost, spec.d_mp), mm = sort_group(cost, spec.d_mm);
    const auto gp = positive_table(pp, pm);
    const auto gm = positive_table(mp, mm);
    const auto dplus = static_cast<long long>(spec.d_plus.size());
    const auto dminus = static_cast<long long>(spec.d_minus.size());
    const double scale = rho / static_cast<double>(dplus * dminus);

    double best = kInf;
    std::size_t bp = 0, bm = 0;
    for (std::size_t p = 0; p < gp.cost.size(); ++p) {
        for (std::size_t m = 0; m < gm.cost.size(); ++m) {
            long long diff = static_cast<long long>(p) * dminus - static_cast<long long>(m) * dplus;
            double v = gp.cost[p] + gm.cost[m] + scale * static_cast<double>(diff < 0 ? -diff : diff);
            if (v < best) {
                best = v;
                bp = p;
                bm = m;
            }
        }
    }
    Selection z(spec.n);
    take_prefix(z, pp, gp.take_pos[bp]);
    take_prefix(z, pm, gp.take_neg[bp]);
    take_prefix(z, mp, gm.take_pos[bm]);
    take_prefix(z, mm, gm.take_neg[bm]);
    FairnessSpec s = spec;
    s.kind = FairnessKind::DP;
    return finish(cost, std::move(z), s, rho);
}

SelectionOutcome select_f1_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.n_plus.empty()) throw InvalidInput("F1 selection needs positive labels");
    const auto P = sort_group(cost, spec.n_plus);
    const auto M = sort_group(cost, spec.n_minus);
    const long long n = static_cast<long long>(spec.n);
    const long long np = static_cast<long long>(spec.n_plus.size());
    const long long nm = static_cast<long long>(spec.n_minus.size());
    const auto tau = static_cast<long long>(count_below(P, cost, 0.0));

    double best = kInf;
    long long best_p = 0, best_m = 0;
    for (long long km = 0; km <= nm; ++km) {
        auto phi = [&](long long k) {
            return static_cast<double>(n - k - km) / static_cast<double>(n + k - km);
        };
        auto delta = [&](long long k) { return cost[P.order[k - 1]] + rho * (phi(k) - phi(k - 1)); };
        // delta is nondecreasing in k; find the largest k in [tau, np] with delta(k) < 0
        long long lo = tau, hi = np;
        while (lo < hi) {
            long long mid = (lo + hi + 1) / 2;
            if (delta(mid) < 0.0) lo = mid;
            else hi = mid - 1;
        }
        double v = P.prefix[lo] + M.prefix[km] + rho * phi(lo);
        if (v < best) {
            best = v;
            best_p = lo;
            best_m = km;
        }
    }
    Selection z(spec.n);
    take_prefix(z, P, static_cast<std::size_t>(best_p));
    take_prefix(z, M, static_cast<std::size_t>(best_m));
    FairnessSpec s = spec;
    s.kind = FairnessKind::F1Complement;
    return finish(cost, std::move(z), s, rho);
}

SelectionOutcome select_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    switch (spec.kind) {
        case FairnessKind::OMR: return select_omr_costs(cost, spec, rho);
        case FairnessKind::FPR: return select_fpr_costs(cost, spec, rho);
        case FairnessKind::EO: return select_eo_costs(cost, spec, rho);
        case FairnessKind::DP: return select_dp_costs(cost, spec, rho);
        case FairnessKind::F1Complement: return select_f1_costs(cost, spec, rho);
    }
    throw InvalidInput("unknown fairness kind");
}

SelectionOutcome brute_select_costs(std::span<const double> cost, const FairnessSpec& spec, double rho) {
    check_costs(cost, spec, rho);
    if (spec.n > 20) throw InvalidInput("brute force limited to N <= 20");
    spec.require_valid();
    const std::size_t n = spec.n;
    Selection z(n), best_z(n);
    double best = kInf;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        for (std::size_t i = 0; i < n; ++i) z.z[i] = (mask >> i) & 1U;
        double v = selection_objective(cost, z, spec, rho);
        if (v < best) {
            best = v;
            best_z = z;
        }
    }
    return {best_z, best};
}

SelectionOutcome select_omr(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    FairnessSpec s = spec;
    s.kind = FairnessKind::OMR;
    return select_omr_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

SelectionOutcome select_fpr(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    FairnessSpec s = spec;
    s.kind = FairnessKind::FPR;
    return select_fpr_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

SelectionOutcome select_eo(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    FairnessSpec s = spec;
    s.kind = FairnessKind::EO;
    return select_eo_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

SelectionOutcome select_dp(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    FairnessSpec s = spec;
    s.kind = FairnessKind::DP;
    return select_dp_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

SelectionOutcome select_f1(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    FairnessSpec s = spec;
    s.kind = FairnessKind::F1Complement;
    return select_f1_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

SelectionOutcome select(const Scores& u, const FairnessSpec& spec, const HyperParams& h) {
    return select_costs(adjusted_costs(u, spec, h.t), spec, h.rho);
}

SelectionOutcome brute_select(const Scores& u, const FairnessSpec& spec, const HyperParams& h, FairnessKind kind) {
    FairnessSpec s = spec;
    s.kind = kind;
    return brute_select_costs(adjusted_costs(u, s, h.t), s, h.rho);
}

double multiclass_objective(const MultiScores& u, std::span<const int> true_class, const OneHotSelection& z,
                            const FairnessSpec& spec, const HyperParams& h) {
    const std::size_t n = u.values.rows, K = u.values.cols;
    if (z.size() != n || true_class.size() != n || spec.n != n) throw InvalidInput("length mismatch");
    const double inv_n = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < K; ++j)
            if (static_cast<int>(j) != true_class[i] && !z.at(i, j)) row += u.values(i, j) - h.t;
        acc += row * inv_n;
    }
    return acc + h.rho * omr_multiclass(z, true_class, spec);
}

std::vector<int> worst_wrong_class(const MultiScores& u, std::span<const int> true_class) {
    const std::size_t n = u.values.rows, K = u.values.cols;
    std::vector<int> out(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        double bv = -kInf;
        for (std::size_t j = 0; j < K; ++j) {
            if (static_cast<int>(j) == true_class[i]) continue;
            if (u.values(i, j) > bv) {
                bv = u.values(i, j);
                out[i] = static_cast<int>(j);
            }
        }
    }
    return out;
}

MultiSelectionOutcome select_omr_multiclass(const MultiScores& u, std::span<const int> true_class,
                                            const FairnessSpec& spec, const HyperParams& h) {
    const std::size_t n = u.values.rows, K = u.values.cols;
    if (K < 2) throw InvalidInput("multiclass selection needs K >= 2");
    if (true_class.size() != n || spec.n != n) throw InvalidInput("length mismatch");
    if (!(h.rho >= 0.0)) throw InvalidInput("rho must be >= 0");
    if (spec.d_plus.empty() || spec.d_minus.empty()) throw InvalidInput("OMR selection needs both groups");
    for (double v : u.values.values)
        if (!std::isfinite(v)) throw InvalidInput("non-finite score");
    const auto jstar = worst_wrong_class(u, true_class);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        double c1 = 0.0, c0 = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (static_cast<int>(j) == true_class[i]) continue;
            double c = (u.values(i, j) - h.t) * inv_n;
            c1 += c;
            if (static_cast<int>(j) != jstar[i]) c0 += c;
        }
        diff[i] = c1 - c0;
    }
    Selection picked(n);
    pair_select(diff, spec.d_plus, spec.d_minus, h.rho, picked);
    MultiSelectionOutcome out;
    out.z.classes = K;
    out.z.hot.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.z.hot[i] = picked.z[i] ? true_class[i] : jstar[i];
    out.value = multiclass_objective(u, true_class, out.z, spec, h);
    return out;
}

MultiSelectionOutcome brute_select_multiclass(const MultiScores& u, std::span<const int> true_class,
                                              const FairnessSpec& spec, const HyperParams& h, bool restricted) {
    const std::size_t n = u.values.rows, K = u.values.cols;
    if (restricted ? n > 20 : (n > 8 || K > 3)) throw InvalidInput("multiclass brute force size cap exceeded");
    if (spec.d_plus.empty() || spec.d_minus.empty()) throw InvalidInput("OMR selection needs both groups");
    const auto jstar = worst_wrong_class(u, true_class);
    const std::size_t choices = restricted ? 2 : K;
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= choices;

    OneHotSelection z;
    z.classes = K;
    z.hot.assign(n, 0);
    MultiSelectionOutcome best;
    best.value = kInf;
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t d = c % choices;
            c /= choices;
            z.hot[i] = restricted ? (d == 0 ? true_class[i] : jstar[i]) : static_cast<int>(d);
        }
        double v = multiclass_objective(u, true_class, z, spec, h);
        if (v < best.value) {
            best.value = v;
            best.z = z;
        }
    }
    return best;
}

}  // namespace fairsel
