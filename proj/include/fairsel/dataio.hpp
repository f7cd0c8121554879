#pragma once

#include "fairsel/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fairsel {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws MissingColumn.
    std::size_t column(const std::string& name) const;
};

/// RFC-4180: quoted fields, doubled quotes, CRLF or LF line ends, header row first.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& t);

/*!
 * \brief Column roles for load_csv.
 *
 * Without positive_label the label column is read as multiclass: distinct values
 * in sorted order become classes 1..K.
 */
struct Schema {
    std::string label_col;
    std::optional<std::string> positive_label;
    std::string group_col;
    std::string positive_group;
    std::vector<std::string> categorical_cols;

    static Schema from_json(const std::string& text);
    static Schema from_file(const std::string& path);
    std::string to_json() const;
};

/// One-hot for categoricals, min-max to [0,1] for numerics; fitted once, applied to any table.
class Preprocessor {
public:
    /// normalize = false keeps numeric columns as they are.
    static Preprocessor fit(const CsvTable& t, const Schema& s, bool normalize = true);
    /// Throws MissingColumn, NonNumericValue, UnseenCategory.
    Dataset transform(const CsvTable& t) const;
    const std::vector<std::string>& feature_names() const { return names_; }
    /// Multiclass label values in class order (empty for binary schemas).
    const std::vector<std::string>& class_values() const { return classes_; }

private:
    struct Column {
        std::string name;
        bool categorical = false;
        std::vector<std::string> levels;
        double lo = 0.0, hi = 0.0;
    };
    Schema schema_;
    bool normalize_ = true;
    std::vector<Column> cols_;
    std::vector<std::string> names_;
    std::vector<std::string> classes_;
};

Dataset load_csv(const std::string& path, const Schema& schema, bool normalize = true);

/// Features with 17 significant digits, then `label` and `group` columns.
void write_dataset_csv(std::ostream& out, const Dataset& d, const std::vector<std::string>& feature_names = {});
void write_dataset_csv(const std::string& path, const Dataset& d, const std::vector<std::string>& feature_names = {});
/// Schema that reads back a file written by write_dataset_csv.
Schema dataset_csv_schema(const Dataset& d);

/// Reads a file written by write_dataset_csv without any preprocessing.
Dataset read_dataset_csv(const std::string& path);

/// 200 points, 50 per (label, group) cell, raw (unnormalized) coordinates.
Dataset synth_gaussian_2d(std::uint64_t seed);

/*!
 * \brief Random test instance: gaussian features shifted by class, random groups.
 *
 * Binary instances have every (label, group) cell nonempty when N >= 4;
 * multiclass instances have every class and both groups present.
 */
Dataset synth_random(std::uint64_t seed, std::size_t n_points, std::size_t dim, int classes = 2);

struct SplitIndices {
    std::vector<std::size_t> train, test;
};

/// Stratified by (label, group) cell with largest-remainder apportionment.
SplitIndices split_indices(const Dataset& data, double ratio, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, double ratio, std::uint64_t seed);

struct Folds {
    std::vector<SplitIndices> folds;
    std::vector<std::string> warnings;
};

/*!
 * \brief Stratified k-fold partition.
 *
 * When a (label, group) cell has fewer than k points, a warning is recorded and
 * the folds are stratified by label only.
 */
Folds kfold(const Dataset& data, std::size_t k, std::uint64_t seed);

}  // namespace fairsel
