#pragma once

// Aggregation of an encoded observation table into feature buckets: one
// record per realized feature combination with its class counts (m0, m1).

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ild/csv.hpp"
#include "ild/dataio.hpp"
#include "ild/error.hpp"

namespace ild {

using Count = std::int64_t;
using BucketKey = std::vector<Code>;

struct Bucket {
    BucketKey key;
    Count m0 = 0;
    Count m1 = 0;

    Count size() const { return m0 + m1; }
    bool is_perfect() const { return m0 == 0 || m1 == 0; }

    friend bool operator==(const Bucket&, const Bucket&) = default;
};

/// Buckets sorted lexicographically by key, keys distinct, every bucket
/// non-empty. Immutable once built.
class AggregatedDataset {
public:
    AggregatedDataset() = default;

    explicit AggregatedDataset(std::vector<Bucket> buckets) : buckets_(std::move(buckets)) {
        std::sort(buckets_.begin(), buckets_.end(), [](const Bucket& a, const Bucket& b) { return a.key < b.key; });
        for (std::size_t j = 0; j < buckets_.size(); ++j) {
            const auto& b = buckets_[j];
            detail::require(b.m0 >= 0 && b.m1 >= 0 && b.size() >= 1, "bucket counts must be non-negative and non-empty");
            detail::require(j == 0 || buckets_[j - 1].key != b.key, "bucket keys must be distinct");
            detail::require(b.key.size() == buckets_.front().key.size(), "bucket keys must share one width");
            m0_ += b.m0;
            m1_ += b.m1;
        }
    }

    /// Buckets with keys (0), (1), ... in the given count order. Handy for
    /// datasets that exist only as count tables.
    static AggregatedDataset from_counts(const std::vector<std::pair<Count, Count>>& counts) {
        std::vector<Bucket> buckets;
        buckets.reserve(counts.size());
        for (std::size_t j = 0; j < counts.size(); ++j) {
            buckets.push_back({{static_cast<Code>(j)}, counts[j].first, counts[j].second});
        }
        return AggregatedDataset(std::move(buckets));
    }

    const std::vector<Bucket>& buckets() const { return buckets_; }
    const Bucket& operator[](std::size_t j) const { return buckets_[j]; }
    std::size_t size() const { return buckets_.size(); }  // N_B
    bool empty() const { return buckets_.empty(); }
    Count total() const { return m0_ + m1_; }  // M
    Count total0() const { return m0_; }        // M0
    Count total1() const { return m1_; }        // M1
    std::size_t n_features() const { return buckets_.empty() ? 0 : buckets_.front().key.size(); }

    /// Index of the bucket with `key`, or size() if absent.
    std::size_t find(const BucketKey& key) const {
        const auto it = std::lower_bound(buckets_.begin(), buckets_.end(), key,
                                         [](const Bucket& b, const BucketKey& k) { return b.key < k; });
        return it != buckets_.end() && it->key == key ? static_cast<std::size_t>(it - buckets_.begin())
                                                      : buckets_.size();
    }

    friend bool operator==(const AggregatedDataset& a, const AggregatedDataset& b) {
        return a.buckets_ == b.buckets_;
    }

private:
    std::vector<Bucket> buckets_;
    Count m0_ = 0;
    Count m1_ = 0;
};

inline AggregatedDataset aggregate(const ObservationTable& table) {
    std::map<BucketKey, std::pair<Count, Count>> counts;
    for (const auto& obs : table) {
        auto& c = counts[obs.codes];
        (obs.label ? c.second : c.first) += 1;
    }
    std::vector<Bucket> buckets;
    buckets.reserve(counts.size());
    for (auto& [key, c] : counts) buckets.push_back({key, c.first, c.second});
    return AggregatedDataset(std::move(buckets));
}

/// Expands each bucket into m0 rows labelled 0 followed by m1 rows labelled 1.
inline ObservationTable disaggregate(const AggregatedDataset& data) {
    ObservationTable table(data.n_features());
    for (const auto& b : data.buckets()) {
        for (Count i = 0; i < b.m0; ++i) table.add(b.key, 0);
        for (Count i = 0; i < b.m1; ++i) table.add(b.key, 1);
    }
    return table;
}

/// Bucket indices split by purity. `only1` holds buckets with m0 = 0,
/// `only0` those with m1 = 0, `mixed` those with both classes. The perfect
/// set is only0 together with only1.
struct BucketPartition {
    std::vector<std::size_t> only0;
    std::vector<std::size_t> only1;
    std::vector<std::size_t> mixed;

    std::size_t n_perfect() const { return only0.size() + only1.size(); }
    bool dataset_is_perfect() const { return mixed.empty(); }
};

inline BucketPartition classify_buckets(const AggregatedDataset& data) {
    BucketPartition part;
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto& b = data[j];
        if (b.m0 == 0) {
            part.only1.push_back(j);
        } else if (b.m1 == 0) {
            part.only0.push_back(j);
        } else {
            part.mixed.push_back(j);
        }
    }
    return part;
}

namespace detail {

inline std::vector<std::string> key_columns(const AggregatedDataset& data, const FeatureSchema* schema) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < data.n_features(); ++i) {
        names.push_back(schema ? schema->feature(i).name : "F" + std::to_string(i + 1));
    }
    return names;
}

inline Code display_code(Code c, std::size_t feature, const FeatureSchema* schema) {
    return schema && c == schema->feature(feature).sentinel() ? kMissing : c;
}

}  // namespace detail

/// Table-shaped CSV: one column per feature, then m0 and m1. With a schema,
/// columns carry the feature names and sentinel codes are written as -1.
inline void write_buckets_csv(std::ostream& out, const AggregatedDataset& data, const FeatureSchema* schema = nullptr) {
    auto header = detail::key_columns(data, schema);
    header.push_back("m0");
    header.push_back("m1");
    csv::write_record(out, header);
    for (const auto& b : data.buckets()) {
        csv::Record rec;
        for (std::size_t i = 0; i < b.key.size(); ++i) rec.push_back(std::to_string(detail::display_code(b.key[i], i, schema)));
        rec.push_back(std::to_string(b.m0));
        rec.push_back(std::to_string(b.m1));
        csv::write_record(out, rec);
    }
}

inline nlohmann::ordered_json buckets_to_json(const AggregatedDataset& data, const FeatureSchema* schema = nullptr) {
    nlohmann::ordered_json j;
    j["features"] = detail::key_columns(data, schema);
    j["N_B"] = data.size();
    j["M"] = data.total();
    j["M0"] = data.total0();
    j["M1"] = data.total1();
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : data.buckets()) {
        std::vector<Code> key;
        for (std::size_t i = 0; i < b.key.size(); ++i) key.push_back(detail::display_code(b.key[i], i, schema));
        arr.push_back({{"key", key}, {"m0", b.m0}, {"m1", b.m1}});
    }
    j["buckets"] = std::move(arr);
    return j;
}

}  // namespace ild
