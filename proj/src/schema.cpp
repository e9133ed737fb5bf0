#include "slicescope/schema.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace slicescope {

TopCategories top_j_categories(const std::map<std::string, uint64_t>& value_counts,
                               size_t top_j) {
    if (value_counts.empty()) {
        throw std::invalid_argument("top_j_categories: empty value counts");
    }
    if (top_j == 0) {
        throw std::invalid_argument("top_j_categories: top_j must be >= 1");
    }
    // The map iterates values in ascending order; a stable sort on count
    // therefore breaks frequency ties lexicographically.
    std::vector<std::pair<std::string, uint64_t>> items(value_counts.begin(),
                                                        value_counts.end());
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    TopCategories out;
    const size_t keep = std::min(top_j, items.size());
    out.retained.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.retained.push_back(items[i].first);
    out.has_other = items.size() > top_j;
    return out;
}

namespace {

std::vector<double> quantile_lower_edges(std::vector<double> values, size_t num_bins) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    std::vector<double> edges{values.front()};
    for (size_t k = 1; k < num_bins; ++k) {
        size_t idx = (k * n + num_bins - 1) / num_bins;  // ceil(k*n/num_bins)
        if (idx >= n) idx = n - 1;
        if (values[idx] > edges.back()) edges.push_back(values[idx]);
    }
    return edges;
}

}  // namespace

FeatureSchema infer_schema(const RawDataset& dataset, size_t top_j, size_t num_bins) {
    if (top_j == 0) throw std::invalid_argument("infer_schema: top_j must be >= 1");
    if (num_bins == 0) throw std::invalid_argument("infer_schema: num_bins must be >= 1");

    FeatureSchema schema;
    schema.features.reserve(dataset.features.size());
    for (const auto& col : dataset.features) {
        FeatureEntry entry;
        entry.name = col.name;
        entry.kind = col.kind;
        if (col.kind == FeatureKind::Categorical) {
            std::map<std::string, uint64_t> counts;
            for (const auto& cell : col.raw) {
                if (!cell.empty()) counts[cell]++;
            }
            if (counts.empty()) {
                throw SchemaError("feature '" + col.name + "' has no non-missing values");
            }
            TopCategories top = top_j_categories(counts, top_j);
            entry.categories = std::move(top.retained);
            entry.has_other = top.has_other;
        } else {
            std::vector<double> values;
            values.reserve(col.numeric.size());
            for (size_t r = 0; r < col.numeric.size(); ++r) {
                if (col.raw[r].empty()) continue;
                if (std::isfinite(col.numeric[r])) values.push_back(col.numeric[r]);
            }
            if (values.empty()) {
                throw SchemaError("feature '" + col.name + "' has no non-missing values");
            }
            entry.bin_lower_edges = quantile_lower_edges(std::move(values), num_bins);
        }
        schema.features.push_back(std::move(entry));
    }
    return schema;
}

int32_t encode_numeric(const FeatureEntry& feature, double v) {
    const auto& edges = feature.bin_lower_edges;
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    if (it == edges.begin()) return 0;  // below the observed minimum
    return static_cast<int32_t>(it - edges.begin()) - 1;
}

EncodedDataset encode(const RawDataset& dataset,
                      const std::vector<PredictionSet>& predictions,
                      const FeatureSchema& schema) {
    if (schema.feature_count() != dataset.features.size()) {
        throw IngestError("encode: schema does not match the dataset's feature count");
    }
    for (const auto& pred : predictions) {
        if (pred.scores.size() != dataset.n_rows) {
            throw IngestError("prediction set '" + pred.model_id + "' has " +
                              std::to_string(pred.scores.size()) + " rows, dataset has " +
                              std::to_string(dataset.n_rows));
        }
        for (double s : pred.scores) {
            if (!(s >= 0.0 && s <= 1.0)) {
                throw IngestError("prediction set '" + pred.model_id +
                                  "' has a score outside [0,1]");
            }
        }
    }

    const size_t n_features = schema.feature_count();
    EncodedDataset out;
    out.schema = schema;
    out.n_rows = dataset.n_rows;
    out.labels = dataset.labels;
    out.values.assign(dataset.n_rows * n_features, kMissingValue);
    for (const auto& pred : predictions) {
        out.model_ids.push_back(pred.model_id);
        out.scores.push_back(pred.scores);
    }

    // Per-feature category lookup tables.
    std::vector<std::unordered_map<std::string, int32_t>> category_ids(n_features);
    for (size_t f = 0; f < n_features; ++f) {
        const auto& entry = schema.features[f];
        if (entry.kind != FeatureKind::Categorical) continue;
        for (size_t i = 0; i < entry.categories.size(); ++i) {
            category_ids[f].emplace(entry.categories[i], static_cast<int32_t>(i));
        }
    }

    std::vector<size_t> bad_rows;
    for (size_t r = 0; r < dataset.n_rows; ++r) {
        for (size_t f = 0; f < n_features; ++f) {
            const auto& col = dataset.features[f];
            const auto& entry = schema.features[f];
            const std::string& cell = col.raw[r];
            if (cell.empty()) continue;  // stays kMissingValue
            int32_t id;
            if (entry.kind == FeatureKind::Categorical) {
                auto it = category_ids[f].find(cell);
                if (it != category_ids[f].end()) {
                    id = it->second;
                } else if (entry.has_other) {
                    id = entry.other_id();
                } else {
                    throw IngestError("feature '" + col.name + "' row " + std::to_string(r) +
                                      ": value '" + cell + "' not covered by the schema");
                }
            } else {
                const double v = col.numeric[r];
                if (!std::isfinite(v)) {
                    bad_rows.push_back(r);
                    continue;
                }
                id = encode_numeric(entry, v);
            }
            out.values[r * n_features + f] = id;
        }
    }
    if (!bad_rows.empty()) {
        std::string rows;
        for (size_t i = 0; i < bad_rows.size() && i < 8; ++i) {
            if (i) rows += ", ";
            rows += std::to_string(bad_rows[i]);
        }
        if (bad_rows.size() > 8) rows += ", ...";
        throw IngestError("non-finite numeric values at rows: " + rows);
    }
    return out;
}

}  // namespace slicescope
