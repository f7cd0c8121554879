#include "fairsel/micp.hpp"

#include "fairsel/fairness.hpp"
#include "fairsel/subselect.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fairsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx_name(const char* base, std::size_t i) { return std::string(base) + "_" + std::to_string(i); }

std::string idx_name(const char* base, std::size_t i, std::size_t j) {
    return std::string(base) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

const char* sense_str(RowSense s) {
    switch (s) {
        case RowSense::LessEqual: return "<=";
        case RowSense::Equal: return "=";
        case RowSense::GreaterEqual: return ">=";
    }
    return "?";
}

RowSense parse_sense(const std::string& s) {
    if (s == "<=") return RowSense::LessEqual;
    if (s == "=") return RowSense::Equal;
    if (s == ">=") return RowSense::GreaterEqual;
    throw InvalidInput("unknown row sense: " + s);
}

nlohmann::ordered_json bound_json(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

double bound_from(const nlohmann::ordered_json& j, double inf) {
    if (j.is_null()) return inf;
    return j.get<double>();
}

nlohmann::ordered_json coeffs_json(const Coeffs& c) {
    auto o = nlohmann::ordered_json::object();
    for (const auto& [n, v] : c) o[n] = v;
    return o;
}

Coeffs coeffs_from(const nlohmann::ordered_json& j) {
    Coeffs c;
    for (auto it = j.begin(); it != j.end(); ++it) c.emplace_back(it.key(), it.value().get<double>());
    return c;
}

/// The signed fairness expression as sum a_i z_i + constant.
struct SignedExpr {
    std::vector<std::pair<std::size_t, double>> terms;
    double constant = 0.0;
};

SignedExpr signed_fairness(const FairnessSpec& spec) {
    SignedExpr e;
    auto add = [&](const std::vector<std::size_t>& idx, double coef) {
        for (auto i : idx) e.terms.emplace_back(i, coef);
    };
    auto inv = [](std::size_t n) { return 1.0 / static_cast<double>(n); };
    switch (spec.kind) {
        case FairnessKind::OMR:
            add(spec.d_plus, inv(spec.d_plus.size()));
            add(spec.d_minus, -inv(spec.d_minus.size()));
            break;
        case FairnessKind::FPR:
            add(spec.d_pm, inv(spec.d_pm.size()));
            add(spec.d_mm, -inv(spec.d_mm.size()));
            break;
        case FairnessKind::EO:
            add(spec.d_pp, inv(spec.d_pp.size()));
            add(spec.d_mp, -inv(spec.d_mp.size()));
            break;
        case FairnessKind::DP: {
            double ip = inv(spec.d_plus.size()), im = inv(spec.d_minus.size());
            add(spec.d_pp, ip);
            add(spec.d_pm, -ip);
            add(spec.d_mp, -im);
            add(spec.d_mm, im);
            e.constant = static_cast<double>(spec.d_pm.size()) * ip - static_cast<double>(spec.d_mm.size()) * im;
            break;
        }
        case FairnessKind::F1Complement: throw InvalidInput("F1 is not an absolute-value fairness measure");
    }
    std::sort(e.terms.begin(), e.terms.end());
    return e;
}

/// f >= E and f >= -E.
void add_abs_rows(MicpModel& m, const SignedExpr& e, const std::vector<std::string>& znames) {
    Coeffs up{{"f", 1.0}}, down{{"f", 1.0}};
    for (const auto& [i, a] : e.terms) {
        up.emplace_back(znames[i], -a);
        down.emplace_back(znames[i], a);
    }
    m.add_row(std::move(up), RowSense::GreaterEqual, e.constant);
    m.add_row(std::move(down), RowSense::GreaterEqual, -e.constant);
}

void add_mccormick(MicpModel& m, const std::string& s, const std::string& u, const std::string& z, double M) {
    m.add_row({{s, 1.0}, {z, -M}}, RowSense::LessEqual, 0.0);
    m.add_row({{s, 1.0}, {u, -1.0}}, RowSense::LessEqual, 0.0);
    m.add_row({{s, 1.0}, {u, -1.0}, {z, -M}}, RowSense::GreaterEqual, -M);
}

double resolve_m(std::optional<double> m_u, const HyperParams& h, const Dataset& data, const FairnessSpec& spec) {
    if (m_u) {
        if (!(*m_u > 0.0) || !std::isfinite(*m_u)) throw InvalidInput("M_u override must be positive and finite");
        return *m_u;
    }
    return safe_big_m(h, data, spec);
}

/// w, b, u_i, z_i, s_i and the hinge rows shared by the binary builders.
void binary_core(MicpModel& m, const Dataset& data, double M, std::vector<std::string>& z, std::vector<std::string>& s) {
    const std::size_t n = data.dim(), N = data.size();
    for (std::size_t j = 0; j < n; ++j) m.add_var(idx_name("w", j), VarKind::Continuous, -kInf, kInf);
    m.add_var("b", VarKind::Continuous, -kInf, kInf);
    std::vector<std::string> u(N);
    z.resize(N);
    s.resize(N);
    for (std::size_t i = 0; i < N; ++i) m.add_var(u[i] = idx_name("u", i), VarKind::Continuous, 0.0, kInf);
    for (std::size_t i = 0; i < N; ++i) m.add_var(z[i] = idx_name("z", i), VarKind::Binary, 0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i) m.add_var(s[i] = idx_name("s", i), VarKind::Continuous, 0.0, kInf);
    for (std::size_t i = 0; i < N; ++i) {
        double y = data.labels[i];
        Coeffs row;
        auto x = data.x(i);
        for (std::size_t j = 0; j < n; ++j) row.emplace_back(idx_name("w", j), y * x[j]);
        row.emplace_back("b", y);
        row.emplace_back(u[i], 1.0);
        m.add_row(std::move(row), RowSense::GreaterEqual, 1.0);
    }
    for (std::size_t i = 0; i < N; ++i) add_mccormick(m, s[i], u[i], z[i], M);
    for (std::size_t j = 0; j < n; ++j) m.qobj.push_back({idx_name("w", j), idx_name("w", j), 0.0});
}

void set_ridge(MicpModel& m, double lambda) {
    for (auto& q : m.qobj) q.coef = lambda;
}

void require_binary(const Dataset& data) {
    data.validate();
    if (!data.is_binary()) throw InvalidInput("binary labels required");
}

std::vector<double> hinge(const Dataset& data, const LinearModel& m) {
    std::vector<double> u(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) u[i] = std::max(0.0, 1.0 - data.labels[i] * m.decision(data.x(i)));
    return u;
}

}  // namespace

std::size_t MicpModel::add_var(std::string name, VarKind kind, double lb, double ub) {
    if (index_.count(name)) throw InvalidInput("duplicate variable " + name);
    index_[name] = vars.size();
    vars.push_back({std::move(name), kind, lb, ub});
    return vars.size() - 1;
}

void MicpModel::add_row(Coeffs coeffs, RowSense sense, double rhs) { linear.push_back({std::move(coeffs), sense, rhs}); }

const MicpVar& MicpModel::var(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InvalidInput("undeclared variable " + name);
    return vars[it->second];
}

void MicpModel::validate() const {
    for (const auto& v : vars)
        if (v.kind == VarKind::Binary && (v.lb != 0.0 || v.ub != 1.0))
            throw InvalidInput("binary variable " + v.name + " must have bounds [0,1]");
    for (const auto& r : linear)
        for (const auto& [n, c] : r.coeffs) (void)var(n);
    for (const auto& q : qobj) {
        (void)var(q.name1);
        (void)var(q.name2);
    }
    for (const auto& c : rcones) {
        (void)var(c.t);
        (void)var(c.u);
        for (const auto& x : c.x) (void)var(x);
    }
    for (const auto& [n, c] : obj) (void)var(n);
}

std::string to_json(const MicpModel& m, int indent) {
    using J = nlohmann::ordered_json;
    J root;
    J vars = J::array();
    for (const auto& v : m.vars) {
        J o;
        o["name"] = v.name;
        o["kind"] = v.kind == VarKind::Binary ? "binary" : "continuous";
        o["lb"] = bound_json(v.lb);
        o["ub"] = bound_json(v.ub);
        vars.push_back(std::move(o));
    }
    root["vars"] = std::move(vars);
    J lin = J::array();
    for (const auto& r : m.linear) {
        J o;
        o["coeffs"] = coeffs_json(r.coeffs);
        o["sense"] = sense_str(r.sense);
        o["rhs"] = r.rhs;
        lin.push_back(std::move(o));
    }
    root["linear"] = std::move(lin);
    J q = J::array();
    for (const auto& t : m.qobj) q.push_back(J{{"name1", t.name1}, {"name2", t.name2}, {"coef", t.coef}});
    root["qobj"] = std::move(q);
    J cones = J::array();
    for (const auto& c : m.rcones) cones.push_back(J{{"t", c.t}, {"u", c.u}, {"x", c.x}});
    root["rcones"] = std::move(cones);
    root["obj"] = J{{"coeffs", coeffs_json(m.obj)}, {"constant", m.obj_constant}, {"sense", "min"}};
    return root.dump(indent);
}

MicpModel micp_from_json(const std::string& text) {
    using J = nlohmann::ordered_json;
    MicpModel m;
    try {
        J root = J::parse(text);
        for (const auto& v : root.at("vars")) {
            std::string kind = v.at("kind").get<std::string>();
            if (kind != "binary" && kind != "continuous") throw InvalidInput("unknown variable kind: " + kind);
            m.add_var(v.at("name").get<std::string>(), kind == "binary" ? VarKind::Binary : VarKind::Continuous,
                      bound_from(v.at("lb"), -kInf), bound_from(v.at("ub"), kInf));
        }
        for (const auto& r : root.at("linear"))
            m.add_row(coeffs_from(r.at("coeffs")), parse_sense(r.at("sense").get<std::string>()),
                      r.at("rhs").get<double>());
        for (const auto& q : root.at("qobj"))
            m.qobj.push_back({q.at("name1").get<std::string>(), q.at("name2").get<std::string>(),
                              q.at("coef").get<double>()});
        for (const auto& c : root.at("rcones"))
            m.rcones.push_back(
                {c.at("t").get<std::string>(), c.at("u").get<std::string>(), c.at("x").get<std::vector<std::string>>()});
        const auto& o = root.at("obj");
        if (o.at("sense").get<std::string>() != "min") throw InvalidInput("only minimization models are supported");
        m.obj = coeffs_from(o.at("coeffs"));
        if (o.contains("constant")) m.obj_constant = o.at("constant").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed model document: ") + e.what());
    }
    m.validate();
    return m;
}

std::string to_lp(const MicpModel& m) {
    if (!m.rcones.empty()) throw InvalidInput("LP format cannot express cone rows; export JSON instead");
    std::ostringstream os;
    os.precision(17);
    auto term = [&](double c, const std::string& name, bool& first) {
        if (std::fabs(c) < 1e-17) return;
        os << (c < 0 ? " - " : (first ? " " : " + ")) << std::fabs(c) << ' ' << name;
        first = false;
    };
    os << "Minimize\n obj:";
    bool first = true;
    for (const auto& [n, c] : m.obj) term(c, n, first);
    bool any_q = std::any_of(m.qobj.begin(), m.qobj.end(), [](const QuadTerm& q) { return std::fabs(q.coef) >= 1e-17; });
    if (any_q) {
        os << (first ? " [" : " + [");
        bool qf = true;
        for (const auto& q : m.qobj) {
            std::string t = q.name1 == q.name2 ? q.name1 + " ^2" : q.name1 + " * " + q.name2;
            term(2.0 * q.coef, t, qf);
        }
        os << " ] / 2";
        first = false;
    }
    if (std::fabs(m.obj_constant) >= 1e-17) {
        os << (m.obj_constant < 0 ? " - " : (first ? " " : " + ")) << std::fabs(m.obj_constant);
        first = false;
    }
    if (first) os << " 0 " << m.vars.front().name;
    os << "\nSubject To\n";
    for (std::size_t r = 0; r < m.linear.size(); ++r) {
        const auto& row = m.linear[r];
        os << " c" << r << ':';
        bool f = true;
        for (const auto& [n, c] : row.coeffs) term(c, n, f);
        if (f) os << " 0 " << m.vars.front().name;
        os << ' ' << sense_str(row.sense) << ' ' << (std::fabs(row.rhs) < 1e-17 ? 0.0 : row.rhs) << '\n';
    }
    os << "Bounds\n";
    for (const auto& v : m.vars) {
        if (v.kind == VarKind::Binary) continue;
        if (std::isinf(v.lb) && std::isinf(v.ub)) {
            os << ' ' << v.name << " free\n";
            continue;
        }
        os << ' ';
        if (std::isinf(v.lb)) os << "-inf";
        else os << v.lb;
        os << " <= " << v.name << " <= ";
        if (std::isinf(v.ub)) os << "+inf";
        else os << v.ub;
        os << '\n';
    }
    bool header = false;
    for (const auto& v : m.vars) {
        if (v.kind != VarKind::Binary) continue;
        if (!header) os << "Binaries\n";
        header = true;
        os << ' ' << v.name << '\n';
    }
    os << "End\n";
    return os.str();
}

FeasibilityReport evaluate(const MicpModel& m, const Assignment& a, double tol) {
    FeasibilityReport rep;
    auto val = [&](const std::string& n) {
        auto it = a.find(n);
        if (it == a.end()) throw InvalidInput("assignment lacks variable " + n);
        return it->second;
    };
    auto note = [&](double v, std::string what) {
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.worst = std::move(what);
        }
    };
    for (const auto& v : m.vars) {
        double x = val(v.name);
        note(v.lb - x, "lower bound of " + v.name);
        note(x - v.ub, "upper bound of " + v.name);
        if (v.kind == VarKind::Binary) note(std::fabs(x - std::round(x)), "integrality of " + v.name);
    }
    for (std::size_t r = 0; r < m.linear.size(); ++r) {
        const auto& row = m.linear[r];
        double lhs = 0.0;
        for (const auto& [n, c] : row.coeffs) lhs += c * val(n);
        double viol = 0.0;
        switch (row.sense) {
            case RowSense::LessEqual: viol = lhs - row.rhs; break;
            case RowSense::GreaterEqual: viol = row.rhs - lhs; break;
            case RowSense::Equal: viol = std::fabs(lhs - row.rhs); break;
        }
        note(viol, "row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < m.rcones.size(); ++c) {
        const auto& cone = m.rcones[c];
        double t = val(cone.t), u = val(cone.u), sq = 0.0;
        for (const auto& x : cone.x) sq += val(x) * val(x);
        note(-t, "cone " + std::to_string(c) + " t sign");
        note(-u, "cone " + std::to_string(c) + " u sign");
        note(sq - t * u, "cone " + std::to_string(c));
    }
    rep.feasible = rep.max_violation <= tol;
    double obj = m.obj_constant;
    for (const auto& [n, c] : m.obj) obj += c * val(n);
    for (const auto& q : m.qobj) obj += q.coef * val(q.name1) * val(q.name2);
    rep.objective = obj;
    return rep;
}

double big_m(const HyperParams& h, const Dataset& data) {
    if (!(h.lambda > 0.0)) throw InvalidInput("big-M needs lambda > 0; supply an explicit M_u");
    if (!(h.t > 0.0)) throw InvalidInput("big-M needs t > 0");
    return 2.0 + 2.0 * std::sqrt(h.t / h.lambda) * data.max_row_norm();
}

double safe_big_m(const HyperParams& h, const Dataset& data, const FairnessSpec& spec) {
    if (!data.is_binary()) {
        if (!(h.lambda > 0.0)) throw InvalidInput("big-M needs lambda > 0; supply an explicit M_u");
        if (!(h.t > 0.0)) throw InvalidInput("big-M needs t > 0");
        const std::size_t N = data.size(), K = static_cast<std::size_t>(data.class_count);
        std::vector<int> cls(N);
        for (std::size_t i = 0; i < N; ++i) cls[i] = data.class_index(i);
        MultiScores u{Matrix(N, K, 1.0)};
        for (std::size_t i = 0; i < N; ++i) u.values(i, static_cast<std::size_t>(cls[i])) = 0.0;
        double h0 = select_omr_multiclass(u, cls, spec, h).value;
        double l1 = std::sqrt(std::max(0.0, h.t * static_cast<double>(K - 1) + h0) / h.lambda);
        return 2.0 + 2.0 * std::sqrt(2.0) * l1 * data.max_row_norm();
    }
    if (spec.kind == FairnessKind::OMR || spec.kind == FairnessKind::FPR || spec.kind == FairnessKind::EO)
        return big_m(h, data);
    if (!(h.lambda > 0.0)) throw InvalidInput("big-M needs lambda > 0; supply an explicit M_u");
    if (!(h.t > 0.0)) throw InvalidInput("big-M needs t > 0");
    Scores ones{std::vector<double>(data.size(), 1.0), Direction::CorrectWhenAtMost};
    double h0 = select(ones, spec, h).value;
    auto w = accuracy_weights(spec);
    double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    double l1 = std::sqrt(std::max(0.0, h.t * wsum + h0) / h.lambda);
    return 2.0 + 2.0 * l1 * data.max_row_norm();
}

Rational s_hat(std::int64_t d_plus, std::int64_t d_minus) {
    if (d_plus < 1 || d_minus < 1) throw InvalidInput("s_hat needs positive group sizes");
    std::int64_t g = std::gcd(d_plus, d_minus);
    std::int64_t den = d_plus * d_minus;
    return {1, den / g};
}

MicpModel build_gsvmf(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, std::optional<double> m_u) {
    require_binary(data);
    spec.require_valid();
    if (spec.n != data.size()) throw InvalidInput("fairness spec does not match the data");
    if (spec.kind == FairnessKind::F1Complement) throw InvalidInput("use the F1 builder for F1 fairness");
    auto expr = signed_fairness(spec);
    const double M = resolve_m(m_u, h, data, spec);
    MicpModel m;
    std::vector<std::string> z, s;
    binary_core(m, data, M, z, s);
    m.add_var("f", VarKind::Continuous, 0.0, kInf);
    add_abs_rows(m, expr, z);
    set_ridge(m, h.lambda);
    auto w = accuracy_weights(spec);
    for (std::size_t i = 0; i < data.size(); ++i) m.obj.emplace_back(s[i], w[i]);
    for (std::size_t i = 0; i < data.size(); ++i) m.obj.emplace_back(z[i], -w[i] * h.t);
    m.obj.emplace_back("f", h.rho);
    return m;
}

MicpModel build_gsvm_f1(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, std::optional<double> m_u) {
    require_binary(data);
    spec.require_valid();
    if (spec.n != data.size()) throw InvalidInput("fairness spec does not match the data");
    if (spec.kind != FairnessKind::F1Complement) throw InvalidInput("the F1 builder needs F1 fairness");
    const double M = resolve_m(m_u, h, data, spec);
    const std::size_t N = data.size();
    const double n = static_cast<double>(N);
    MicpModel m;
    std::vector<std::string> z, s;
    binary_core(m, data, M, z, s);
    m.add_var("eta", VarKind::Continuous, 0.0, kInf);
    m.add_var("A", VarKind::Continuous, n - static_cast<double>(spec.n_minus.size()),
              n + static_cast<double>(spec.n_plus.size()));
    std::vector<std::string> e(N);
    for (std::size_t i = 0; i < N; ++i) m.add_var(e[i] = idx_name("e", i), VarKind::Continuous, 0.0, 1.0);
    Coeffs arow{{"A", 1.0}};
    for (auto i : spec.n_plus) arow.emplace_back(z[i], -1.0);
    for (auto i : spec.n_minus) arow.emplace_back(z[i], 1.0);
    m.add_row(std::move(arow), RowSense::Equal, n);
    for (std::size_t i = 0; i < N; ++i) m.add_row({{e[i], 1.0}, {z[i], 1.0}}, RowSense::Equal, 1.0);
    m.rcones.push_back({"eta", "A", e});
    set_ridge(m, h.lambda);
    auto w = accuracy_weights(spec);
    for (std::size_t i = 0; i < N; ++i) m.obj.emplace_back(s[i], w[i]);
    for (std::size_t i = 0; i < N; ++i) m.obj.emplace_back(z[i], -w[i] * h.t);
    m.obj.emplace_back("eta", h.rho);
    return m;
}

MicpModel build_gmsvmf(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, std::optional<double> m_u) {
    data.validate();
    spec.require_valid();
    if (spec.n != data.size()) throw InvalidInput("fairness spec does not match the data");
    if (spec.kind != FairnessKind::OMR) throw InvalidInput("the multiclass builder supports OMR only");
    const double M = resolve_m(m_u, h, data, spec);
    const std::size_t N = data.size(), n = data.dim(), K = static_cast<std::size_t>(data.class_count);
    const double inv_n = 1.0 / static_cast<double>(N);
    MicpModel m;
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t q = 0; q < n; ++q) m.add_var(idx_name("w", j, q), VarKind::Continuous, -kInf, kInf);
    for (std::size_t j = 0; j < K; ++j) m.add_var(idx_name("b", j), VarKind::Continuous, -kInf, kInf);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (static_cast<int>(j) != data.class_index(i))
                m.add_var(idx_name("u", i, j), VarKind::Continuous, 0.0, kInf);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < K; ++j) m.add_var(idx_name("z", i, j), VarKind::Binary, 0.0, 1.0);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (static_cast<int>(j) != data.class_index(i))
                m.add_var(idx_name("s", i, j), VarKind::Continuous, 0.0, kInf);
    m.add_var("f", VarKind::Continuous, 0.0, kInf);

    for (std::size_t i = 0; i < N; ++i) {
        auto y = static_cast<std::size_t>(data.class_index(i));
        auto x = data.x(i);
        for (std::size_t j = 0; j < K; ++j) {
            if (j == y) continue;
            Coeffs row;
            for (std::size_t q = 0; q < n; ++q) row.emplace_back(idx_name("w", y, q), x[q]);
            for (std::size_t q = 0; q < n; ++q) row.emplace_back(idx_name("w", j, q), -x[q]);
            row.emplace_back(idx_name("b", y), 1.0);
            row.emplace_back(idx_name("b", j), -1.0);
            row.emplace_back(idx_name("u", i, j), 1.0);
            m.add_row(std::move(row), RowSense::GreaterEqual, 1.0);
        }
    }
    for (std::size_t i = 0; i < N; ++i) {
        Coeffs row;
        for (std::size_t j = 0; j < K; ++j) row.emplace_back(idx_name("z", i, j), 1.0);
        m.add_row(std::move(row), RowSense::Equal, 1.0);
    }
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (static_cast<int>(j) != data.class_index(i))
                add_mccormick(m, idx_name("s", i, j), idx_name("u", i, j), idx_name("z", i, j), M);

    std::vector<std::string> diag(N);
    for (std::size_t i = 0; i < N; ++i) diag[i] = idx_name("z", i, static_cast<std::size_t>(data.class_index(i)));
    add_abs_rows(m, signed_fairness(spec), diag);

    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t q = 0; q < n; ++q) m.qobj.push_back({idx_name("w", j, q), idx_name("w", j, q), h.lambda});
    // (1 - z)(u - t) = u - s - t + t z per wrong-class pair
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < K; ++j)
            if (static_cast<int>(j) != data.class_index(i)) {
                m.obj.emplace_back(idx_name("u", i, j), inv_n);
                m.obj.emplace_back(idx_name("s", i, j), -inv_n);
                m.obj.emplace_back(idx_name("z", i, j), inv_n * h.t);
            }
    m.obj.emplace_back("f", h.rho);
    m.obj_constant = -h.t * static_cast<double>(K - 1);
    return m;
}

Assignment micp_assignment(const Dataset& data, const FairnessSpec& spec, const LinearModel& model, const Selection& z) {
    require_binary(data);
    if (z.size() != data.size() || spec.n != data.size()) throw InvalidInput("length mismatch");
    Assignment a;
    for (std::size_t j = 0; j < model.w.size(); ++j) a[idx_name("w", j)] = model.w[j];
    a["b"] = model.b;
    auto u = hinge(data, model);
    for (std::size_t i = 0; i < data.size(); ++i) {
        a[idx_name("u", i)] = u[i];
        a[idx_name("z", i)] = z.z[i];
        a[idx_name("s", i)] = z.z[i] ? u[i] : 0.0;
    }
    if (spec.kind == FairnessKind::F1Complement) {
        auto fr = f1_fraction(z, spec);
        a["A"] = static_cast<double>(fr.denominator);
        a["eta"] = static_cast<double>(fr.numerator) / static_cast<double>(fr.denominator);
        for (std::size_t i = 0; i < data.size(); ++i) a[idx_name("e", i)] = 1.0 - z.z[i];
    } else {
        a["f"] = fairness_value(z, spec);
    }
    return a;
}

Assignment micp_assignment(const Dataset& data, const FairnessSpec& spec, const MulticlassModel& model,
                           const OneHotSelection& z) {
    data.validate();
    const std::size_t N = data.size(), K = static_cast<std::size_t>(data.class_count), n = data.dim();
    if (z.size() != N || z.classes != K || model.classes() != K) throw InvalidInput("shape mismatch");
    Assignment a;
    for (std::size_t j = 0; j < K; ++j) {
        for (std::size_t q = 0; q < n; ++q) a[idx_name("w", j, q)] = model.w(j, q);
        a[idx_name("b", j)] = model.b[j];
    }
    std::vector<int> cls(N);
    for (std::size_t i = 0; i < N; ++i) {
        cls[i] = data.class_index(i);
        auto y = static_cast<std::size_t>(cls[i]);
        double fy = model.decision(y, data.x(i));
        for (std::size_t j = 0; j < K; ++j) {
            a[idx_name("z", i, j)] = z.at(i, j) ? 1.0 : 0.0;
            if (j == y) continue;
            double u = std::max(0.0, 1.0 - (fy - model.decision(j, data.x(i))));
            a[idx_name("u", i, j)] = u;
            a[idx_name("s", i, j)] = z.at(i, j) ? u : 0.0;
        }
    }
    a["f"] = omr_multiclass(z, cls, spec);
    return a;
}

}  // namespace fairsel
