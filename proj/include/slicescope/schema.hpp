#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "slicescope/common.hpp"

namespace slicescope {

enum class FeatureKind { Categorical, Numeric };

struct RawColumn {
    std::string name;
    FeatureKind kind = FeatureKind::Categorical;
    std::vector<std::string> raw;   // original cells; empty cell = missing
    std::vector<double> numeric;    // Numeric kind only; NaN at missing cells
};

// Rows are identified by position: indices 0..N-1, dense.
struct RawDataset {
    std::vector<RawColumn> features;
    std::vector<uint8_t> labels;    // binary {0,1}
    size_t n_rows = 0;
};

struct PredictionSet {
    std::string model_id;
    std::vector<double> scores;     // one per row, each in [0,1]
};

struct FeatureEntry {
    std::string name;
    FeatureKind kind = FeatureKind::Categorical;

    // Categorical: retained values, most frequent first. Value ids are
    // 0..categories.size()-1; id categories.size() is the OTHER bucket
    // when has_other is set.
    std::vector<std::string> categories;
    bool has_other = false;

    // Numeric: ascending lower edges. Bin k covers [edge[k], edge[k+1]);
    // the last bin is closed above.
    std::vector<double> bin_lower_edges;

    int32_t domain_size() const {
        if (kind == FeatureKind::Categorical) {
            return static_cast<int32_t>(categories.size()) + (has_other ? 1 : 0);
        }
        return static_cast<int32_t>(bin_lower_edges.size());
    }
    int32_t other_id() const { return static_cast<int32_t>(categories.size()); }

    friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

struct FeatureSchema {
    std::vector<FeatureEntry> features;
    size_t feature_count() const { return features.size(); }
    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

struct TopCategories {
    std::vector<std::string> retained;  // most frequent first
    bool has_other = false;             // true iff some values were left out
};

// Retains the top_j most frequent values; frequency ties break by ascending
// value so the result is stable across runs and platforms.
TopCategories top_j_categories(const std::map<std::string, uint64_t>& value_counts,
                               size_t top_j);

// Builds the slicing schema: top-J singleton categories (+ OTHER) for
// categorical features, empirical quantile bins for numeric features.
// Throws SchemaError when a feature has no usable values.
FeatureSchema infer_schema(const RawDataset& dataset, size_t top_j, size_t num_bins);

// Bin id for a numeric value under a feature's edges (last bin closed above).
int32_t encode_numeric(const FeatureEntry& feature, double v);

struct EncodedDataset {
    FeatureSchema schema;
    size_t n_rows = 0;
    std::vector<int32_t> values;    // row-major; kMissingValue where missing
    std::vector<uint8_t> labels;
    std::vector<std::string> model_ids;
    std::vector<std::vector<double>> scores;   // [model][row]

    std::span<const int32_t> row(size_t r) const {
        return {values.data() + r * schema.feature_count(), schema.feature_count()};
    }
};

// Encodes every row against the schema and attaches prediction scores.
// Non-finite numeric cells raise IngestError naming the offending rows;
// a row-count mismatch with the predictions is fatal.
EncodedDataset encode(const RawDataset& dataset,
                      const std::vector<PredictionSet>& predictions,
                      const FeatureSchema& schema);

}  // namespace slicescope
