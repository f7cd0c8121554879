#pragma once

#include "fairsel/core.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <string>

namespace fairsel {

enum class StepSchedule {
    Auto,          ///< inverse-sqrt when lambda = 0, inverse-linear otherwise
    InverseSqrt,   ///< eta0 / sqrt(k)
    InverseLinear  ///< eta0 / (lambda k), or eta0 / k when lambda = 0
};

enum class KernelType { Linear, RBF, Polynomial };

struct Kernel {
    KernelType type = KernelType::Linear;
    double gamma = 1.0;
    int degree = 2;
    double coef = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const;
    void validate() const;
};

struct TrainConfig {
    int iterations = 2000;
    StepSchedule schedule = StepSchedule::Auto;
    double base_rate = 1.0;
    /// Also evaluate the running average of the iterates as a candidate.
    bool averaging = false;
    /// The full-batch solvers here are deterministic and do not draw from it.
    std::uint64_t seed = 0;
    Kernel kernel;
    /// Try to finish hinge problems by solving the KKT system on the guessed active set.
    bool polish = true;
    /// Gradient-norm stop for the logistic solver.
    double tolerance = 1e-10;

    void validate() const;
};

/// Residual value used when no optimality certificate is available.
inline constexpr double kUncertified = std::numeric_limits<double>::infinity();

struct LinearFit {
    LinearModel model;
    Scores scores;
    double objective = 0.0;  ///< weighted loss + lambda |w|^2 on the selected points
    double residual = kUncertified;  ///< upper bound on objective - optimum
    int iterations = 0;
};

/*!
 * \brief Per-point loss weights c_i.
 *
 * An empty span means 1/N for every point. Only selected points contribute.
 */
using Weights = std::span<const double>;

/*!
 * \brief Weighted hinge SVM on the selected points.
 *
 * Subgradient descent in w with the intercept minimized exactly at every
 * step. The best evaluated iterate is returned; a warm start is evaluated
 * first so the result is never worse than it.
 */
LinearFit fit_svm_weighted(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                           Weights weights = {}, const LinearModel* warm = nullptr);

/// Weighted hinge objective plus lambda |w|^2 at a given model.
double svm_objective(const Dataset& data, const Selection& z, const HyperParams& h, const LinearModel& m,
                     Weights weights = {});

/*!
 * \brief Weighted logistic regression by full-batch gradient descent with backtracking.
 *
 * Scores hold the clamped log-likelihood of the true label.
 */
LinearFit fit_logreg_weighted(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                              Weights weights = {}, const LinearModel* warm = nullptr);

/// Per-point log-likelihoods with probabilities clamped to [1e-12, 1 - 1e-12].
Scores log_likelihoods(const LinearModel& m, const Dataset& data);
double logreg_objective(const Dataset& data, const Selection& z, const HyperParams& h, const LinearModel& m,
                        Weights weights = {});
/// Gradient of logreg_objective with respect to (w, b); b is the last entry.
std::vector<double> logreg_gradient(const Dataset& data, const Selection& z, const HyperParams& h,
                                    const LinearModel& m, Weights weights = {});

struct MulticlassFit {
    MulticlassModel model;
    MultiScores scores;
    double objective = 0.0;
    double residual = kUncertified;
    int iterations = 0;
};

/// (1/N) sum_i sum_{j != y_i} (1 - z_ij) max(0, 1 - (f_{y_i} - f_j)) + lambda sum_j |w_j|^2.
double multisvm_objective(const Dataset& data, const OneHotSelection& z, const HyperParams& h,
                          const MulticlassModel& m);

MulticlassFit fit_multisvm_weighted(const Dataset& data, const OneHotSelection& z, const HyperParams& h,
                                    const TrainConfig& cfg, const MulticlassModel* warm = nullptr);

/*!
 * \brief Kernel expansion over the training points: f(x) = sum_s coef_s k(x_s, x) + b.
 *
 * coef_s plays the role of alpha_s y_s.
 */
struct KernelModel {
    Kernel kernel;
    Matrix points;
    std::vector<double> coef;
    double b = 0.0;

    double decision(std::span<const double> x) const;
    std::vector<int> predict(const Matrix& features) const;
};

struct KernelFit {
    KernelModel model;
    Scores scores;
    double objective = 0.0;
    double residual = kUncertified;
    int iterations = 0;
};

/// Gram matrix of the training points, reusable across fits on the same data.
Matrix gram_matrix(const Kernel& k, const Matrix& points);

/*!
 * \brief Kernel hinge SVM on the selected points.
 *
 * Objective: sum_selected c_i max(0, 1 - y_i f(x_i)) + lambda coef' K coef.
 * Throws DegenerateSelection when the selection is empty or holds one class.
 */
KernelFit fit_kernel_svm(const Dataset& data, const Selection& z, const HyperParams& h, const TrainConfig& cfg,
                         Weights weights = {}, const KernelModel* warm = nullptr, const Matrix* gram = nullptr);

double kernel_objective(const Dataset& data, const Selection& z, const HyperParams& h, const KernelModel& m,
                        const Matrix& gram, Weights weights = {});

/*!
 * \brief A black-box trainer: retrains on the selected points and returns, for
 * every point, the probability of predicting its label correctly.
 */
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> train_score(const std::vector<std::size_t>& selected, std::size_t all_n) = 0;
};

/// Validates indices, length and range, and wraps the reply as CorrectWhenAtLeast scores.
Scores blackbox_scores(Scorer& endpoint, const std::vector<std::size_t>& selected, std::size_t all_n);

/// In-process scorer backed by fit_logreg_weighted with a cold start per request.
class LogregScorer : public Scorer {
public:
    LogregScorer(Dataset data, HyperParams h, TrainConfig cfg);
    std::vector<double> train_score(const std::vector<std::size_t>& selected, std::size_t all_n) override;

private:
    Dataset data_;
    HyperParams h_;
    TrainConfig cfg_;
};

class ConstantScorer : public Scorer {
public:
    explicit ConstantScorer(double value) : value_(value) {}
    std::vector<double> train_score(const std::vector<std::size_t>&, std::size_t all_n) override {
        return std::vector<double>(all_n, value_);
    }

private:
    double value_;
};

/*!
 * \brief Child process speaking line-delimited JSON on stdin/stdout.
 *
 * The command runs under /bin/sh -c. One request is in flight at a time.
 */
class SubprocessScorer : public Scorer {
public:
    explicit SubprocessScorer(const std::string& command, int timeout_ms = 60000);
    ~SubprocessScorer() override;
    SubprocessScorer(const SubprocessScorer&) = delete;
    SubprocessScorer& operator=(const SubprocessScorer&) = delete;

    std::vector<double> train_score(const std::vector<std::size_t>& selected, std::size_t all_n) override;
    void quit();

private:
    std::string read_line();
    void write_line(const std::string& s);

    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    int timeout_ms_;
    std::string buffer_;
};

/// Request line for the scorer protocol.
std::string scorer_request(const std::vector<std::size_t>& selected, std::size_t all_n);
/// Parses and validates a reply line; throws the protocol errors.
std::vector<double> parse_scorer_reply(const std::string& line, std::size_t all_n);

}  // namespace fairsel
