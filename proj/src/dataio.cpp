#include "fairsel/dataio.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace fairsel {

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::optional<double> parse_number(const std::string& raw) {
    std::string s = trim(raw);
    if (s.empty()) return std::nullopt;
    const char* first = s.data();
    if (*first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

bool same_value(const std::string& cell, const std::string& ref) {
    if (trim(cell) == trim(ref)) return true;
    auto a = parse_number(cell), b = parse_number(ref);
    return a && b && *a == *b;
}

std::string fmt17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

Dataset take(const Dataset& d, const std::vector<std::size_t>& idx) { return d.subset(idx); }

/// Stratum key per point: (label, group) or label only.
std::vector<std::vector<std::size_t>> strata(const Dataset& d, bool with_group) {
    std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < d.size(); ++i) cells[{d.labels[i], with_group ? d.groups[i] : 0}].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [k, v] : cells) out.push_back(std::move(v));
    return out;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumn("missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    std::size_t line = 1;
    for (std::size_t p = 0; p < text.size(); ++p) {
        char c = text[p];
        if (quoted) {
            if (c == '"') {
                if (p + 1 < text.size() && text[p + 1] == '"') {
                    field += '"';
                    ++p;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty()) throw DataError("stray quote on line " + std::to_string(line));
            quoted = true;
            any = true;
        } else if (c == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && p + 1 < text.size() && text[p + 1] == '\n') ++p;
            if (any || !field.empty()) {
                rec.push_back(std::move(field));
                records.push_back(std::move(rec));
            }
            rec.clear();
            field.clear();
            any = false;
            ++line;
        } else {
            field += c;
        }
    }
    if (quoted) throw DataError("unterminated quoted field");
    if (any || !field.empty()) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("empty CSV");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    return read_csv(f);
}

void write_csv(std::ostream& out, const CsvTable& t) {
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << quote(r[j]);
        out << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

Schema Schema::from_json(const std::string& text) {
    Schema s;
    try {
        auto j = nlohmann::json::parse(text);
        auto str = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        s.label_col = j.at("label_col").get<std::string>();
        if (j.contains("positive_label") && !j["positive_label"].is_null()) s.positive_label = str(j["positive_label"]);
        s.group_col = j.at("group_col").get<std::string>();
        s.positive_group = str(j.at("positive_group"));
        if (j.contains("categorical_cols")) s.categorical_cols = j["categorical_cols"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad schema: ") + e.what());
    }
    return s;
}

Schema Schema::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open schema " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json(ss.str());
}

std::string Schema::to_json() const {
    nlohmann::ordered_json j;
    j["label_col"] = label_col;
    j["positive_label"] = positive_label ? nlohmann::ordered_json(*positive_label) : nlohmann::ordered_json(nullptr);
    j["group_col"] = group_col;
    j["positive_group"] = positive_group;
    j["categorical_cols"] = categorical_cols;
    return j.dump(2);
}

Preprocessor Preprocessor::fit(const CsvTable& t, const Schema& s, bool normalize) {
    Preprocessor p;
    p.schema_ = s;
    p.normalize_ = normalize;
    auto lc = t.column(s.label_col);
    auto gc = t.column(s.group_col);
    for (const auto& c : s.categorical_cols) (void)t.column(c);
    if (t.rows.empty()) throw DataError("no data rows");
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        if (j == lc || j == gc) continue;
        Column col;
        col.name = t.header[j];
        col.categorical = std::find(s.categorical_cols.begin(), s.categorical_cols.end(), col.name) !=
                          s.categorical_cols.end();
        if (col.categorical) {
            std::set<std::string> lv;
            for (const auto& r : t.rows) lv.insert(trim(r[j]));
            col.levels.assign(lv.begin(), lv.end());
            for (const auto& l : col.levels) p.names_.push_back(col.name + "=" + l);
        } else {
            col.lo = std::numeric_limits<double>::infinity();
            col.hi = -col.lo;
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                auto v = parse_number(t.rows[r][j]);
                if (!v)
                    throw NonNumericValue("non-numeric value '" + t.rows[r][j] + "' in column " + col.name + ", row " +
                                          std::to_string(r + 2));
                col.lo = std::min(col.lo, *v);
                col.hi = std::max(col.hi, *v);
            }
            p.names_.push_back(col.name);
        }
        p.cols_.push_back(std::move(col));
    }
    if (!s.positive_label) {
        std::vector<std::string> vals;
        for (const auto& r : t.rows) vals.push_back(trim(r[lc]));
        std::sort(vals.begin(), vals.end(), [](const std::string& a, const std::string& b) {
            auto x = parse_number(a), y = parse_number(b);
            if (x && y) return *x < *y;
            if (x || y) return bool(x);
            return a < b;
        });
        vals.erase(std::unique(vals.begin(), vals.end(), same_value), vals.end());
        if (vals.size() < 2) throw DataError("label column has fewer than two classes");
        p.classes_ = std::move(vals);
    }
    return p;
}

Dataset Preprocessor::transform(const CsvTable& t) const {
    auto lc = t.column(schema_.label_col);
    auto gc = t.column(schema_.group_col);
    std::vector<std::size_t> src;
    for (const auto& c : cols_) src.push_back(t.column(c.name));
    Dataset d;
    const std::size_t N = t.rows.size();
    d.features = Matrix(N, names_.size());
    d.labels.resize(N);
    d.groups.resize(N);
    d.class_count = classes_.empty() ? 2 : static_cast<int>(classes_.size());
    for (std::size_t r = 0; r < N; ++r) {
        const auto& row = t.rows[r];
        std::size_t out = 0;
        for (std::size_t c = 0; c < cols_.size(); ++c) {
            const auto& col = cols_[c];
            const std::string& cell = row[src[c]];
            if (col.categorical) {
                auto it = std::lower_bound(col.levels.begin(), col.levels.end(), trim(cell));
                if (it == col.levels.end() || *it != trim(cell))
                    throw UnseenCategory("unseen category '" + cell + "' in column " + col.name);
                d.features(r, out + static_cast<std::size_t>(it - col.levels.begin())) = 1.0;
                out += col.levels.size();
            } else {
                auto v = parse_number(cell);
                if (!v)
                    throw NonNumericValue("non-numeric value '" + cell + "' in column " + col.name + ", row " +
                                          std::to_string(r + 2));
                if (!normalize_) d.features(r, out++) = *v;
                else d.features(r, out++) = col.hi > col.lo ? (*v - col.lo) / (col.hi - col.lo) : 0.0;
            }
        }
        if (classes_.empty()) {
            d.labels[r] = same_value(row[lc], *schema_.positive_label) ? 1 : -1;
        } else {
            auto it = std::find_if(classes_.begin(), classes_.end(),
                                   [&](const std::string& v) { return same_value(row[lc], v); });
            if (it == classes_.end()) throw UnseenCategory("unseen label '" + row[lc] + "'");
            d.labels[r] = static_cast<int>(it - classes_.begin()) + 1;
        }
        d.groups[r] = same_value(row[gc], schema_.positive_group) ? 1 : -1;
    }
    return d;
}

Dataset load_csv(const std::string& path, const Schema& schema, bool normalize) {
    auto t = read_csv_file(path);
    return Preprocessor::fit(t, schema, normalize).transform(t);
}

Dataset read_dataset_csv(const std::string& path) {
    auto t = read_csv_file(path);
    auto lc = t.column("label"), gc = t.column("group");
    Dataset d;
    const std::size_t n = t.header.size() - 2;
    d.features = Matrix(t.rows.size(), n);
    int kmax = 0;
    bool negative = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::size_t out = 0;
        for (std::size_t j = 0; j < t.header.size(); ++j) {
            auto v = parse_number(t.rows[r][j]);
            if (!v) throw NonNumericValue("non-numeric value '" + t.rows[r][j] + "' in column " + t.header[j]);
            if (j == lc) {
                d.labels.push_back(static_cast<int>(*v));
                kmax = std::max(kmax, d.labels.back());
                negative = negative || d.labels.back() < 0;
            } else if (j == gc) {
                d.groups.push_back(static_cast<int>(*v));
            } else {
                d.features(r, out++) = *v;
            }
        }
    }
    d.class_count = negative ? 2 : kmax;
    d.validate();
    return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& d, const std::vector<std::string>& feature_names) {
    if (!feature_names.empty() && feature_names.size() != d.dim()) throw InvalidInput("feature name count mismatch");
    CsvTable t;
    for (std::size_t j = 0; j < d.dim(); ++j)
        t.header.push_back(feature_names.empty() ? "x" + std::to_string(j + 1) : feature_names[j]);
    t.header.push_back("label");
    t.header.push_back("group");
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::vector<std::string> r;
        for (double v : d.x(i)) r.push_back(fmt17(v));
        r.push_back(std::to_string(d.labels[i]));
        r.push_back(std::to_string(d.groups[i]));
        t.rows.push_back(std::move(r));
    }
    write_csv(out, t);
}

void write_dataset_csv(const std::string& path, const Dataset& d, const std::vector<std::string>& feature_names) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    write_dataset_csv(f, d, feature_names);
}

Schema dataset_csv_schema(const Dataset& d) {
    Schema s;
    s.label_col = "label";
    if (d.is_binary()) s.positive_label = "1";
    s.group_col = "group";
    s.positive_group = "1";
    return s;
}

Dataset synth_gaussian_2d(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    struct Cell {
        int y, g;
        double mx, my;
    };
    const Cell cells[] = {{1, 1, 3, 4}, {1, -1, 2, 6}, {-1, 1, 7, 5}, {-1, -1, 8, 3}};
    Dataset d;
    d.features = Matrix(200, 2);
    std::size_t r = 0;
    for (const auto& c : cells)
        for (int k = 0; k < 50; ++k, ++r) {
            d.features(r, 0) = c.mx + 2.0 * n01(rng);
            d.features(r, 1) = c.my + 3.0 * n01(rng);
            d.labels.push_back(c.y);
            d.groups.push_back(c.g);
        }
    return d;
}

Dataset synth_random(std::uint64_t seed, std::size_t n_points, std::size_t dim, int classes) {
    if (classes < 2) throw InvalidInput("need at least two classes");
    if (dim == 0) throw InvalidInput("need at least one feature");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    Dataset d;
    d.class_count = classes;
    d.features = Matrix(n_points, dim);
    for (std::size_t i = 0; i < n_points; ++i) {
        int c = 0, g = 0;
        if (classes == 2 && i < 4) {
            c = static_cast<int>(i / 2);
            g = static_cast<int>(i % 2);
        } else if (classes > 2 && i < static_cast<std::size_t>(classes)) {
            c = static_cast<int>(i);
            g = static_cast<int>(i % 2);
        } else {
            c = cls(rng);
            g = coin(rng);
        }
        d.labels.push_back(classes == 2 ? (c == 0 ? 1 : -1) : c + 1);
        d.groups.push_back(g == 0 ? 1 : -1);
        for (std::size_t j = 0; j < dim; ++j) {
            double shift = (j % static_cast<std::size_t>(classes)) == static_cast<std::size_t>(c) ? 1.0 : 0.0;
            d.features(i, j) = n01(rng) + shift;
        }
    }
    return d;
}

SplitIndices split_indices(const Dataset& data, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidInput("split ratio must lie in (0,1)");
    auto cells = strata(data, true);
    std::mt19937_64 rng(seed);
    for (auto& c : cells) std::shuffle(c.begin(), c.end(), rng);
    const auto N = static_cast<double>(data.size());
    auto total = static_cast<std::size_t>(std::llround(ratio * N));
    std::vector<std::size_t> take_n(cells.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        double q = ratio * static_cast<double>(cells[c].size());
        take_n[c] = static_cast<std::size_t>(std::floor(q));
        used += take_n[c];
        rem.emplace_back(-(q - std::floor(q)), c);
    }
    std::sort(rem.begin(), rem.end());
    for (std::size_t k = 0; used < total && k < rem.size(); ++k, ++used) ++take_n[rem[k].second];
    SplitIndices s;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t k = 0; k < cells[c].size(); ++k) (k < take_n[c] ? s.train : s.test).push_back(cells[c][k]);
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double ratio, std::uint64_t seed) {
    auto s = split_indices(data, ratio, seed);
    return {take(data, s.train), take(data, s.test)};
}

Folds kfold(const Dataset& data, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > data.size()) throw InvalidInput("k must satisfy 2 <= k <= N");
    Folds out;
    auto cells = strata(data, true);
    bool small = std::any_of(cells.begin(), cells.end(), [&](const auto& c) { return c.size() < k; });
    if (small) {
        out.warnings.push_back("a (label, group) cell has fewer than " + std::to_string(k) +
                               " points; stratifying by label only");
        cells = strata(data, false);
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> test(k);
    std::size_t deal = 0;
    for (auto& c : cells) {
        std::shuffle(c.begin(), c.end(), rng);
        for (auto i : c) test[deal++ % k].push_back(i);
    }
    for (std::size_t f = 0; f < k; ++f) {
        SplitIndices s;
        s.test = test[f];
        std::sort(s.test.begin(), s.test.end());
        for (std::size_t g = 0; g < k; ++g)
            if (g != f) s.train.insert(s.train.end(), test[g].begin(), test[g].end());
        std::sort(s.train.begin(), s.train.end());
        out.folds.push_back(std::move(s));
    }
    return out;
}

}  // namespace fairsel
