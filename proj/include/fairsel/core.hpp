#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairsel {

/*! \brief Base of every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*! \brief A precondition on the arguments was violated. */
class InvalidInput : public Error {
public:
    using Error::Error;
};

/*! \brief Selection is empty or holds a single class; trainers cannot proceed. */
class DegenerateSelection : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class MissingColumn : public DataError {
public:
    using DataError::DataError;
};

class NonNumericValue : public DataError {
public:
    using DataError::DataError;
};

class UnseenCategory : public DataError {
public:
    using DataError::DataError;
};

class ProtocolError : public Error {
public:
    using Error::Error;
};

class ProtocolViolation : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

class ProtocolTimeout : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

class ScoreOutOfRange : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

/*! \brief Dense row-major matrix. */
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

/*!
 * \brief Points with labels and a binary sensitive group.
 *
 * Binary labels are -1/+1. Multiclass labels are 1..K.
 */
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<int> groups;
    int class_count = 2;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols; }
    bool is_binary() const { return class_count == 2; }

    std::span<const double> x(std::size_t i) const { return features.row(i); }

    /// 0-based class index; for binary data +1 -> 0 and -1 -> 1.
    int class_index(std::size_t i) const;
    int label_of_class(int j) const;

    void validate() const;
    Dataset subset(std::span<const std::size_t> idx) const;
    double max_row_norm() const;
};

struct HyperParams {
    double t = 1.0;
    double lambda = 0.0;
    double rho = 0.0;
    double delta = 1e-6;
    int max_iter = 50;

    void validate() const;
};

struct LinearModel {
    std::vector<double> w;
    double b = 0.0;

    double decision(std::span<const double> x) const;
    bool operator==(const LinearModel&) const = default;
};

/*! \brief One weight row and intercept per class (K x n). */
struct MulticlassModel {
    Matrix w;
    std::vector<double> b;

    std::size_t classes() const { return b.size(); }
    double decision(std::size_t j, std::span<const double> x) const;
    bool operator==(const MulticlassModel&) const = default;
};

enum class Direction { CorrectWhenAtMost, CorrectWhenAtLeast };

struct Scores {
    std::vector<double> values;
    Direction direction = Direction::CorrectWhenAtMost;

    std::size_t size() const { return values.size(); }
};

/*! \brief N x K pairwise violations; the entry at the true label is unused and kept at 0. */
struct MultiScores {
    Matrix values;
};

struct Selection {
    std::vector<std::uint8_t> z;

    Selection() = default;
    explicit Selection(std::size_t n, std::uint8_t fill = 0) : z(n, fill) {}
    explicit Selection(std::vector<std::uint8_t> v) : z(std::move(v)) {}

    std::size_t size() const { return z.size(); }
    std::size_t count() const;
    std::vector<std::size_t> indices() const;
    bool operator==(const Selection&) const = default;
};

/*! \brief One-hot rows stored as the hot column of each row, so a row always sums to one. */
struct OneHotSelection {
    std::size_t classes = 0;
    std::vector<int> hot;

    std::size_t size() const { return hot.size(); }
    bool at(std::size_t i, std::size_t j) const { return hot[i] == static_cast<int>(j); }

    static OneHotSelection from_matrix(const Matrix& z);
    Matrix to_matrix() const;
    bool operator==(const OneHotSelection&) const = default;
};

enum class FairnessKind { OMR, FPR, EO, DP, F1Complement };

std::string to_string(FairnessKind k);
FairnessKind parse_fairness_kind(const std::string& s);

/*!
 * \brief Index partitions used by the fairness measures.
 *
 * Naming: first sign is the group, second the label, e.g. d_pm = D+-.
 */
struct FairnessSpec {
    FairnessKind kind = FairnessKind::OMR;
    std::size_t n = 0;
    std::vector<std::size_t> d_plus, d_minus;
    std::vector<std::size_t> d_pp, d_pm, d_mp, d_mm;
    std::vector<std::size_t> n_plus, n_minus;

    /// Groups only; the signed subsets and label classes need binary labels.
    static FairnessSpec from_tags(std::span<const int> labels, std::span<const int> groups, FairnessKind kind);
    static FairnessSpec build(const Dataset& data, FairnessKind kind);

    /// Throws InvalidInput when a subset required by `kind` is empty.
    void require_valid() const;
};

struct IrsRecord {
    int iteration = 0;
    double objective = 0.0;
    double accuracy = 0.0;
    double fairness = 0.0;
    double selection_fairness = 0.0;
    std::size_t selected = 0;
    double millis = 0.0;
    double inner_residual = 0.0;
};

struct IrsTrace {
    std::vector<IrsRecord> records;
    int best_iteration = 0;
    bool degenerate_stop = false;
    int monotone_violations = 0;
    std::string stop_reason;
};

std::vector<int> predict(const LinearModel& model, const Matrix& features);
/// Returns 1-based class labels.
std::vector<int> predict(const MulticlassModel& model, const Matrix& features);
Scores margins(const LinearModel& model, const Dataset& data);
MultiScores margins(const MulticlassModel& model, const Dataset& data);

}  // namespace fairsel
