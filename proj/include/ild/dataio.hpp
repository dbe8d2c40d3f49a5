#pragma once

// Loading raw tabular data and encoding it into dense categorical codes.
//
// Every feature i has n_i legitimate codes 0..n_i-1. Missing cells are first
// marked with kMissing (-1) and then imputed with the feature's sentinel code
// n_i, so that all observations missing the same feature land in the same
// bucket while codes stay usable as array indices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ild/csv.hpp"
#include "ild/error.hpp"

namespace ild {

using Code = std::int32_t;

/// Marker for a missing cell before imputation.
inline constexpr Code kMissing = -1;

enum class FeatureKind { categorical, binned };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::categorical;
    std::vector<std::string> categories;  // categorical only
    std::vector<double> edges;            // binned only, strictly increasing

    /// n_i, not counting the sentinel.
    std::size_t cardinality() const {
        return kind == FeatureKind::categorical ? categories.size() : edges.size() + 1;
    }
    Code sentinel() const { return static_cast<Code>(cardinality()); }
    /// Legitimate codes plus the sentinel.
    std::size_t code_space() const { return cardinality() + 1; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && ws(s.back())) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

class FeatureSchema {
public:
    FeatureSchema(std::vector<Feature> features, std::string target,
                  std::vector<std::string> missing_tokens = {"NA"})
        : features_(std::move(features)), target_(std::move(target)) {
        missing_tokens_.emplace_back("");
        for (auto& t : missing_tokens) {
            std::string tok(detail::trim(t));
            if (std::find(missing_tokens_.begin(), missing_tokens_.end(), tok) == missing_tokens_.end()) {
                missing_tokens_.push_back(std::move(tok));
            }
        }
        validate();
    }

    const std::vector<Feature>& features() const { return features_; }
    const Feature& feature(std::size_t i) const { return features_.at(i); }
    std::size_t size() const { return features_.size(); }
    const std::string& target() const { return target_; }
    const std::vector<std::string>& missing_tokens() const { return missing_tokens_; }

    bool is_missing_token(std::string_view cell) const {
        const auto t = detail::trim(cell);
        return std::find(missing_tokens_.begin(), missing_tokens_.end(), t) != missing_tokens_.end();
    }

    /// Parses the key/value schema format:
    ///
    ///     # comment
    ///     target = TenYearCHD
    ///     missing = NA, ?
    ///     feature male = categorical 0, 1
    ///     feature age = binned 40, 60
    ///
    /// Features keep the order in which they appear.
    static FeatureSchema parse(std::istream& in) {
        std::optional<std::string> target;
        std::vector<std::string> missing{"NA"};
        std::vector<Feature> features;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto where = "schema line " + std::to_string(line_no) + ": ";
            auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) throw SchemaError(where + "expected 'key = value'");
            const auto key = detail::trim(body.substr(0, eq));
            const auto value = detail::trim(body.substr(eq + 1));

            if (key == "target") {
                if (value.empty()) throw SchemaError(where + "empty target");
                target = std::string(value);
            } else if (key == "missing") {
                missing = detail::split_list(value);
            } else if (key.substr(0, 8) == "feature " || key.substr(0, 8) == "feature\t") {
                Feature f;
                f.name = std::string(detail::trim(key.substr(8)));
                if (f.name.empty()) throw SchemaError(where + "feature without a name");
                const auto sp = value.find_first_of(" \t");
                const auto kind = value.substr(0, sp);
                const auto rest = sp == std::string_view::npos ? std::string_view{} : value.substr(sp + 1);
                if (kind == "categorical") {
                    f.kind = FeatureKind::categorical;
                    f.categories = detail::split_list(rest);
                } else if (kind == "binned") {
                    f.kind = FeatureKind::binned;
                    for (const auto& e : detail::split_list(rest)) {
                        const auto v = csv::parse_double(e);
                        if (!v || !std::isfinite(*v)) throw SchemaError(where + "bad bin edge '" + e + "'");
                        f.edges.push_back(*v);
                    }
                } else {
                    throw SchemaError(where + "feature kind must be 'categorical' or 'binned'");
                }
                features.push_back(std::move(f));
            } else {
                throw SchemaError(where + "unknown key '" + std::string(key) + "'");
            }
        }
        if (!target) throw SchemaError("schema: missing 'target' key");
        return FeatureSchema(std::move(features), std::move(*target), std::move(missing));
    }

    static FeatureSchema from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open schema file '" + path + "'");
        return parse(in);
    }

private:
    void validate() const {
        if (features_.empty()) throw SchemaError("schema: at least one feature is required");
        for (std::size_t i = 0; i < features_.size(); ++i) {
            const auto& f = features_[i];
            for (std::size_t j = 0; j < i; ++j) {
                if (features_[j].name == f.name) throw SchemaError("schema: duplicate feature '" + f.name + "'");
            }
            if (f.name == target_) throw SchemaError("schema: target '" + f.name + "' is also a feature");
            if (f.kind == FeatureKind::categorical) {
                if (f.categories.empty()) {
                    throw SchemaError("schema: feature '" + f.name + "' needs at least one category");
                }
                for (std::size_t a = 0; a < f.categories.size(); ++a) {
                    if (is_missing_token(f.categories[a])) {
                        throw SchemaError("schema: category '" + f.categories[a] + "' of '" + f.name +
                                          "' collides with a missing-value token");
                    }
                    for (std::size_t b = 0; b < a; ++b) {
                        if (f.categories[a] == f.categories[b]) {
                            throw SchemaError("schema: duplicate category '" + f.categories[a] + "' in '" +
                                              f.name + "'");
                        }
                    }
                }
            } else {
                for (std::size_t k = 1; k < f.edges.size(); ++k) {
                    if (!(f.edges[k - 1] < f.edges[k])) {
                        throw SchemaError("schema: bin edges of '" + f.name + "' must be strictly increasing");
                    }
                }
            }
        }
    }

    std::vector<Feature> features_;
    std::string target_;
    std::vector<std::string> missing_tokens_;
};

struct Observation {
    std::vector<Code> codes;
    std::uint8_t label = 0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Encoded observations. Rows all have the same width; labels are 0 or 1.
class ObservationTable {
public:
    explicit ObservationTable(std::size_t n_features) : n_features_(n_features) {}

    void add(std::vector<Code> codes, int label) {
        detail::require(codes.size() == n_features_, "observation width does not match table");
        detail::require(label == 0 || label == 1, "label must be 0 or 1");
        rows_.push_back({std::move(codes), static_cast<std::uint8_t>(label)});
    }
    void add(const Observation& obs) { add(obs.codes, obs.label); }

    std::size_t n_features() const { return n_features_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const Observation& operator[](std::size_t i) const { return rows_[i]; }
    const std::vector<Observation>& rows() const { return rows_; }
    auto begin() const { return rows_.begin(); }
    auto end() const { return rows_.end(); }

    std::size_t count_label(int label) const {
        return static_cast<std::size_t>(
            std::count_if(rows_.begin(), rows_.end(), [&](const Observation& o) { return o.label == label; }));
    }

    friend bool operator==(const ObservationTable&, const ObservationTable&) = default;

private:
    std::size_t n_features_;
    std::vector<Observation> rows_;
};

/// Bin index of `value`: k such that edges[k-1] <= value < edges[k]. A value
/// equal to an edge goes to the higher bin. NaN yields kMissing.
inline Code discretize(double value, const std::vector<double>& edges) {
    if (std::isnan(value)) return kMissing;
    return static_cast<Code>(std::upper_bound(edges.begin(), edges.end(), value) - edges.begin());
}

/// Encodes one raw cell. Missing tokens give kMissing. Unknown categories and
/// non-numeric values in binned columns throw DataError.
inline Code encode_cell(const Feature& feature, const FeatureSchema& schema, std::string_view raw,
                        std::size_t row) {
    const auto cell = detail::trim(raw);
    const auto fail = [&](const std::string& why) {
        return DataError("row " + std::to_string(row) + ", column '" + feature.name + "': " + why);
    };
    if (schema.is_missing_token(cell)) return kMissing;
    if (feature.kind == FeatureKind::binned) {
        const auto v = csv::parse_double(cell);
        if (!v) throw fail("cannot parse '" + std::string(cell) + "' as a number");
        return discretize(*v, feature.edges);
    }
    const auto& cats = feature.categories;
    for (std::size_t c = 0; c < cats.size(); ++c) {
        if (cats[c] == cell) return static_cast<Code>(c);
    }
    // "1.0" matches category "1"
    if (const auto v = csv::parse_double(cell)) {
        for (std::size_t c = 0; c < cats.size(); ++c) {
            const auto cv = csv::parse_double(cats[c]);
            if (cv && *cv == *v) return static_cast<Code>(c);
        }
    }
    throw fail("value '" + std::string(cell) + "' is not a category of this feature");
}

/// Replaces every kMissing code with the feature's sentinel code.
inline ObservationTable impute_missing(const ObservationTable& table, const FeatureSchema& schema) {
    detail::require(table.n_features() == schema.size(), "table width does not match schema");
    ObservationTable out(table.n_features());
    for (const auto& obs : table) {
        auto codes = obs.codes;
        for (std::size_t i = 0; i < codes.size(); ++i) {
            if (codes[i] == kMissing) codes[i] = schema.feature(i).sentinel();
        }
        out.add(std::move(codes), obs.label);
    }
    return out;
}

/// True when every code is a legitimate category or the sentinel.
inline bool is_valid_encoding(const ObservationTable& table, const FeatureSchema& schema) {
    if (table.n_features() != schema.size()) return false;
    for (const auto& obs : table) {
        for (std::size_t i = 0; i < obs.codes.size(); ++i) {
            if (obs.codes[i] < 0 || obs.codes[i] > schema.feature(i).sentinel()) return false;
        }
    }
    return true;
}

inline ObservationTable load_csv(std::istream& in, const FeatureSchema& schema) {
    std::size_t line_no = 0;
    const auto header = csv::read_record(in, line_no);
    if (!header) throw DataError("input is empty (no header row)");

    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header->size(); ++c) {
        column.emplace(std::string(detail::trim((*header)[c])), c);
    }
    const auto find = [&](const std::string& name) {
        const auto it = column.find(name);
        if (it == column.end()) throw SchemaError("column '" + name + "' not found in header");
        return it->second;
    };
    const std::size_t target_col = find(schema.target());
    std::vector<std::size_t> feature_cols;
    for (const auto& f : schema.features()) feature_cols.push_back(find(f.name));

    ObservationTable raw(schema.size());
    std::size_t row = 0;
    while (auto rec = csv::read_record(in, line_no)) {
        if (rec->size() == 1 && detail::trim((*rec)[0]).empty()) continue;  // blank line
        ++row;
        if (rec->size() != header->size()) {
            throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header->size()) +
                            " fields, found " + std::to_string(rec->size()));
        }
        std::vector<Code> codes(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i) {
            codes[i] = encode_cell(schema.feature(i), schema, (*rec)[feature_cols[i]], row);
        }
        const auto y = csv::parse_double((*rec)[target_col]);
        if (!y || (*y != 0.0 && *y != 1.0)) {
            throw DataError("row " + std::to_string(row) + ", column '" + schema.target() + "': target '" +
                            (*rec)[target_col] + "' is not 0 or 1");
        }
        raw.add(std::move(codes), static_cast<int>(*y));
    }
    return impute_missing(raw, schema);
}

inline ObservationTable load_csv(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file '" + path + "'");
    return load_csv(in, schema);
}

/// Raw cell text that encodes back to `code`: the category label, the lower
/// edge of the bin (one below the first edge for bin 0), or an empty cell for
/// the sentinel.
inline std::string decode_cell(const Feature& feature, Code code) {
    if (code == kMissing || code == feature.sentinel()) return "";
    detail::require(code >= 0 && code < feature.sentinel(), "code out of range for '" + feature.name + "'");
    if (feature.kind == FeatureKind::categorical) return feature.categories[static_cast<std::size_t>(code)];
    if (feature.edges.empty()) return "0";
    if (code == 0) {
        const double first = feature.edges.front();
        const double below = first - 1.0 < first ? first - 1.0 : std::nextafter(first, -HUGE_VAL);
        return csv::format_double(below);
    }
    return csv::format_double(feature.edges[static_cast<std::size_t>(code) - 1]);
}

/// Writes `table` as a raw CSV that load_csv re-encodes to the same table.
inline void write_raw_csv(std::ostream& out, const ObservationTable& table, const FeatureSchema& schema) {
    csv::Record rec;
    for (const auto& f : schema.features()) rec.push_back(f.name);
    rec.push_back(schema.target());
    csv::write_record(out, rec);
    for (const auto& obs : table) {
        rec.clear();
        for (std::size_t i = 0; i < obs.codes.size(); ++i) rec.push_back(decode_cell(schema.feature(i), obs.codes[i]));
        rec.push_back(std::to_string(obs.label));
        csv::write_record(out, rec);
    }
}

/// Debug dump of encoded codes; the sentinel is written as -1.
inline void write_encoded_csv(std::ostream& out, const ObservationTable& table, const FeatureSchema& schema) {
    csv::Record rec;
    for (const auto& f : schema.features()) rec.push_back(f.name);
    rec.push_back("label");
    csv::write_record(out, rec);
    for (const auto& obs : table) {
        rec.clear();
        for (std::size_t i = 0; i < obs.codes.size(); ++i) {
            const Code c = obs.codes[i] == schema.feature(i).sentinel() ? kMissing : obs.codes[i];
            rec.push_back(std::to_string(c));
        }
        rec.push_back(std::to_string(obs.label));
        csv::write_record(out, rec);
    }
}

}  // namespace ild
