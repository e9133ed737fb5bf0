#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace slicescope {

enum class MetricKind { Accuracy, Precision, Recall, F1, Auc, LogLoss };

std::optional<MetricKind> metric_kind_from_name(std::string_view name);
std::string_view metric_kind_name(MetricKind kind);

struct MetricConfig {
    MetricKind kind = MetricKind::Accuracy;
    double threshold = 0.5;   // thresholded metrics: predicted positive iff score >= threshold
    int auc_buckets = 128;

    friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

// Mergeable sufficient statistics for one metric on one slice. Accumulators
// are value-like: any worker can build partials over its rows and the driver
// merges them in any grouping, so extraction never depends on data order
// beyond floating-point association.
//
// Thresholded metrics keep weighted TP/FP/TN/FN; AUC keeps weighted positive
// and negative counts per fixed score bucket (bounded size, hence mergeable);
// log loss keeps the weighted loss sum and total weight.
class MetricAccumulator {
public:
    explicit MetricAccumulator(const MetricConfig& cfg);

    // weight carries the bootstrap replication count; 0 is a no-op.
    void add(int label, double score, double weight);
    void merge(const MetricAccumulator& other);

    // nullopt = undefined (zero weight, no positives for recall/AUC, ...).
    std::optional<double> extract() const;

    const MetricConfig& config() const { return cfg_; }
    double total_weight() const;

private:
    MetricConfig cfg_;
    double tp_ = 0, fp_ = 0, tn_ = 0, fn_ = 0;
    double loss_sum_ = 0, weight_sum_ = 0;
    std::vector<double> pos_, neg_;   // AUC bucket counts
};

}  // namespace slicescope
