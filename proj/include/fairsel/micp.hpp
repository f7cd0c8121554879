#pragma once

#include "fairsel/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairsel {

enum class VarKind { Continuous, Binary };
enum class RowSense { LessEqual, Equal, GreaterEqual };

struct MicpVar {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;  ///< -inf allowed
    double ub = 0.0;  ///< +inf allowed
    bool operator==(const MicpVar&) const = default;
};

using Coeffs = std::vector<std::pair<std::string, double>>;

struct LinearRow {
    Coeffs coeffs;
    RowSense sense = RowSense::GreaterEqual;
    double rhs = 0.0;
    bool operator==(const LinearRow&) const = default;
};

struct QuadTerm {
    std::string name1, name2;
    double coef = 0.0;
    bool operator==(const QuadTerm&) const = default;
};

/// t * u >= sum x_k^2 with t, u >= 0.
struct RotatedCone {
    std::string t, u;
    std::vector<std::string> x;
    bool operator==(const RotatedCone&) const = default;
};

struct MicpModel {
    std::vector<MicpVar> vars;
    std::vector<LinearRow> linear;
    std::vector<QuadTerm> qobj;
    std::vector<RotatedCone> rcones;
    Coeffs obj;
    double obj_constant = 0.0;

    std::size_t add_var(std::string name, VarKind kind, double lb, double ub);
    void add_row(Coeffs coeffs, RowSense sense, double rhs);
    bool has_var(const std::string& name) const { return index_.count(name) > 0; }
    const MicpVar& var(const std::string& name) const;
    /// Throws if a row, term or cone names an undeclared variable or a binary is not [0,1].
    void validate() const;

    bool operator==(const MicpModel& o) const {
        return vars == o.vars && linear == o.linear && qobj == o.qobj && rcones == o.rcones && obj == o.obj &&
               obj_constant == o.obj_constant;
    }

private:
    std::map<std::string, std::size_t> index_;
};

std::string to_json(const MicpModel& m, int indent = 2);
MicpModel micp_from_json(const std::string& text);
/// CPLEX-LP text; rejects models with cone rows.
std::string to_lp(const MicpModel& m);

using Assignment = std::map<std::string, double>;

struct FeasibilityReport {
    bool feasible = false;
    double max_violation = 0.0;
    std::string worst;  ///< description of the largest violation
    double objective = 0.0;
};

FeasibilityReport evaluate(const MicpModel& m, const Assignment& a, double tol = 1e-8);

/// 2 + 2 sqrt(t / lambda) max ||x_i||.
double big_m(const HyperParams& h, const Dataset& data);

/*!
 * \brief A bound on every optimal u that holds for all fairness kinds.
 *
 * OMR, FPR and EO use big_m. DP, F1 and multiclass replace t in L1 by
 * t * sum(weights) + h0, where h0 is the optimal selection value at w = 0, b = 0.
 */
double safe_big_m(const HyperParams& h, const Dataset& data, const FairnessSpec& spec);

struct Rational {
    std::int64_t num = 0, den = 1;
    bool operator==(const Rational&) const = default;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Smallest positive |a/D+ - b/D-| over integer counts.
Rational s_hat(std::int64_t d_plus, std::int64_t d_minus);

/// `m_u` overrides the bound (needed when lambda = 0).
MicpModel build_gsvmf(const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                      std::optional<double> m_u = std::nullopt);
MicpModel build_gmsvmf(const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                       std::optional<double> m_u = std::nullopt);
MicpModel build_gsvm_f1(const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                        std::optional<double> m_u = std::nullopt);

/// Variable values for a linear model and selection with tight u = hinge and s = z u.
Assignment micp_assignment(const Dataset& data, const FairnessSpec& spec, const LinearModel& m, const Selection& z);
Assignment micp_assignment(const Dataset& data, const FairnessSpec& spec, const MulticlassModel& m,
                           const OneHotSelection& z);

}  // namespace fairsel
