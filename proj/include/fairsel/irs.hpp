#pragma once

#include "fairsel/core.hpp"
#include "fairsel/train.hpp"

#include <optional>

namespace fairsel {

enum class ModelKind { SVM, Logistic, Kernel, Multiclass, BlackBox };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

struct IrsConfig {
    TrainConfig train;
    /// Required for ModelKind::BlackBox.
    Scorer* scorer = nullptr;
};

/// The fitted classifier; only the member matching `kind` is meaningful.
struct FittedModel {
    ModelKind kind = ModelKind::SVM;
    LinearModel linear;
    MulticlassModel multi;
    KernelModel kernel;
};

struct IrsResult {
    FittedModel model;
    Selection z;            ///< binary kinds
    OneHotSelection onehot; ///< multiclass
    Scores scores;
    MultiScores multi_scores;
    IrsTrace trace;
    double objective = 0.0;
    /// Inner-solve residual of the returned iterate.
    double residual = 0.0;
    /// Predicted labels on the training data (black-box: the true label iff p >= 0.5).
    std::vector<int> train_predictions;
};

/*!
 * \brief Alternates exact selection and refitting until H stops improving by more than delta.
 *
 * `init` replaces the vanilla fit on all data as the starting model. The
 * iterate with the smallest H is returned.
 */
IrsResult irs_fit(ModelKind kind, const Dataset& data, const HyperParams& h, const FairnessSpec& spec,
                  const IrsConfig& cfg, const FittedModel* init = nullptr);

/// H for a binary model's scores: weighted accuracy term + lambda * reg + rho * F(z).
double objective_h(const Scores& u, const Selection& z, const FairnessSpec& spec, const HyperParams& h, double reg);

struct GapReport {
    double bound = 0.0;
    bool holds = false;
};

GapReport approximation_gap(double h_hat, double v_star, const Selection& z_hat, const Selection& z_star, double m_u,
                            std::size_t n);

/// Model predictions on arbitrary features (black-box models cannot predict new points).
std::vector<int> predict(const FittedModel& m, const Matrix& features, const Dataset& reference);

}  // namespace fairsel
