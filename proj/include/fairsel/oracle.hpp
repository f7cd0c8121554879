#pragma once

#include "fairsel/irs.hpp"

namespace fairsel {

struct OracleResult {
    FittedModel model;
    Selection z;             ///< binary kinds
    OneHotSelection onehot;  ///< multiclass
    double value = 0.0;      ///< v_rho
    /// Largest inner residual over all enumerated selections; v_rho is exact to within it.
    double residual = 0.0;
    std::size_t enumerated = 0;
};

/*!
 * \brief Exhaustive minimization over z with a convex solve per z.
 *
 * Caps: N <= 16 for binary kinds, N <= 6 and K <= 3 for multiclass. The inner
 * solves run the regular trainers with 100x the configured iteration budget.
 * Ties go to the lexicographically smallest z. Black-box models are rejected.
 */
OracleResult exact_solve_tiny(const Dataset& data, const HyperParams& h, const FairnessSpec& spec, ModelKind kind,
                              const TrainConfig& cfg = {}, unsigned threads = 1);

}  // namespace fairsel
