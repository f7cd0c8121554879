#pragma once

#include "fairsel/core.hpp"

namespace fairsel {

struct SelectionOutcome {
    Selection z;
    double value = 0.0;
};

struct MultiSelectionOutcome {
    OneHotSelection z;
    double value = 0.0;
};

/// Per-point accuracy weights: 1/N, or 1/N+ and 1/N- for the F1 kind.
std::vector<double> accuracy_weights(const FairnessSpec& spec);

/// Adjusted costs u_hat_i = weight_i * (u_i - t), sign flipped for CorrectWhenAtLeast.
std::vector<double> adjusted_costs(const Scores& u, const FairnessSpec& spec, double t);

/// sum z_i * cost_i + rho * F(z), F chosen by spec.kind.
double selection_objective(std::span<const double> cost, const Selection& z, const FairnessSpec& spec, double rho);

/*!
 * \brief Exact minimizers of sum z_i cost_i + rho F(z) on precomputed costs.
 *
 * These are the workhorses behind the Scores overloads below.
 */
SelectionOutcome select_omr_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
SelectionOutcome select_fpr_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
SelectionOutcome select_eo_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
SelectionOutcome select_dp_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
SelectionOutcome select_f1_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
/// Dispatches on spec.kind.
SelectionOutcome select_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);
/// Exhaustive search, N <= 20.
SelectionOutcome brute_select_costs(std::span<const double> cost, const FairnessSpec& spec, double rho);

SelectionOutcome select_omr(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome select_fpr(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome select_eo(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome select_dp(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome select_f1(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome select(const Scores& u, const FairnessSpec& spec, const HyperParams& h);
SelectionOutcome brute_select(const Scores& u, const FairnessSpec& spec, const HyperParams& h, FairnessKind kind);

/// (1/N) sum_i sum_{j != y_i} (1 - z_ij)(u_ij - t) + rho * OMR of the diagonal.
double multiclass_objective(const MultiScores& u, std::span<const int> true_class, const OneHotSelection& z,
                            const FairnessSpec& spec, const HyperParams& h);

/// Largest wrong-label violation per row, smallest index on ties.
std::vector<int> worst_wrong_class(const MultiScores& u, std::span<const int> true_class);

MultiSelectionOutcome select_omr_multiclass(const MultiScores& u, std::span<const int> true_class,
                                            const FairnessSpec& spec, const HyperParams& h);

/*!
 * \brief Exhaustive multiclass search.
 *
 * With `restricted` each row ranges over {y_i, j_i*} (N <= 20); otherwise over
 * all K columns (N <= 8, K <= 3).
 */
MultiSelectionOutcome brute_select_multiclass(const MultiScores& u, std::span<const int> true_class,
                                              const FairnessSpec& spec, const HyperParams& h, bool restricted);

}  // namespace fairsel
