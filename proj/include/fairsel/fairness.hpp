#pragma once

#include "fairsel/core.hpp"

namespace fairsel {

/*!
 * \brief Fairness measures over correctness indicators z.
 *
 * The measures read only the index sets they need from `spec`, so a spec
 * built for one kind can be used to report another. Empty required sets
 * raise InvalidInput.
 */
double omr(const Selection& z, const FairnessSpec& spec);
double fpr(const Selection& z, const FairnessSpec& spec);
double eo(const Selection& z, const FairnessSpec& spec);
double dp(const Selection& z, const FairnessSpec& spec);
double f1_complement(const Selection& z, const FairnessSpec& spec);

/// Numerator and denominator of 1 - F1 as integers.
struct F1Fraction {
    long long numerator = 0;
    long long denominator = 0;
};
F1Fraction f1_fraction(const Selection& z, const FairnessSpec& spec);

/// `true_class` holds 0-based class indices.
double omr_multiclass(const OneHotSelection& z, std::span<const int> true_class, const FairnessSpec& spec);

/// Dispatches on spec.kind.
double fairness_value(const Selection& z, const FairnessSpec& spec);

/// z_i = 1 iff predicted[i] == labels[i].
Selection correctness(std::span<const int> predicted, std::span<const int> labels);

}  // namespace fairsel
