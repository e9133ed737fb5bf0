#include "slicescope/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace slicescope {

namespace {
constexpr double kLogLossEps = 1e-7;
}

std::optional<MetricKind> metric_kind_from_name(std::string_view name) {
    if (name == "accuracy") return MetricKind::Accuracy;
    if (name == "precision") return MetricKind::Precision;
    if (name == "recall") return MetricKind::Recall;
    if (name == "f1") return MetricKind::F1;
    if (name == "auc") return MetricKind::Auc;
    if (name == "log_loss") return MetricKind::LogLoss;
    return std::nullopt;
}

std::string_view metric_kind_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::Accuracy: return "accuracy";
        case MetricKind::Precision: return "precision";
        case MetricKind::Recall: return "recall";
        case MetricKind::F1: return "f1";
        case MetricKind::Auc: return "auc";
        case MetricKind::LogLoss: return "log_loss";
    }
    return "?";
}

MetricAccumulator::MetricAccumulator(const MetricConfig& cfg) : cfg_(cfg) {
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
        throw std::invalid_argument("metric threshold must lie in (0,1)");
    }
    if (cfg.auc_buckets < 2) {
        throw std::invalid_argument("auc bucket count must be >= 2");
    }
    if (cfg_.kind == MetricKind::Auc) {
        pos_.assign(cfg_.auc_buckets, 0.0);
        neg_.assign(cfg_.auc_buckets, 0.0);
    }
}

void MetricAccumulator::add(int label, double score, double weight) {
    if (label != 0 && label != 1) {
        throw std::invalid_argument("label must be 0 or 1");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
        throw std::invalid_argument("score outside [0,1]: " + std::to_string(score));
    }
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw std::invalid_argument("weight must be finite and non-negative");
    }
    if (weight == 0.0) return;

    switch (cfg_.kind) {
        case MetricKind::Accuracy:
        case MetricKind::Precision:
        case MetricKind::Recall:
        case MetricKind::F1: {
            const bool predicted = score >= cfg_.threshold;
            if (label == 1) {
                (predicted ? tp_ : fn_) += weight;
            } else {
                (predicted ? fp_ : tn_) += weight;
            }
            break;
        }
        case MetricKind::Auc: {
            int b = static_cast<int>(score * cfg_.auc_buckets);
            if (b >= cfg_.auc_buckets) b = cfg_.auc_buckets - 1;
            (label == 1 ? pos_ : neg_)[b] += weight;
            break;
        }
        case MetricKind::LogLoss: {
            const double s = std::min(1.0 - kLogLossEps, std::max(kLogLossEps, score));
            const double loss = label == 1 ? -std::log(s) : -std::log(1.0 - s);
            loss_sum_ += weight * loss;
            weight_sum_ += weight;
            break;
        }
    }
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
    if (!(cfg_ == other.cfg_)) {
        throw std::invalid_argument("cannot merge accumulators of different metric configs");
    }
    tp_ += other.tp_;
    fp_ += other.fp_;
    tn_ += other.tn_;
    fn_ += other.fn_;
    loss_sum_ += other.loss_sum_;
    weight_sum_ += other.weight_sum_;
    for (size_t i = 0; i < pos_.size(); ++i) {
        pos_[i] += other.pos_[i];
        neg_[i] += other.neg_[i];
    }
}

double MetricAccumulator::total_weight() const {
    switch (cfg_.kind) {
        case MetricKind::LogLoss:
            return weight_sum_;
        case MetricKind::Auc: {
            double w = 0;
            for (double v : pos_) w += v;
            for (double v : neg_) w += v;
            return w;
        }
        default:
            return tp_ + fp_ + tn_ + fn_;
    }
}

std::optional<double> MetricAccumulator::extract() const {
    switch (cfg_.kind) {
        case MetricKind::Accuracy: {
            const double w = tp_ + fp_ + tn_ + fn_;
            if (w == 0.0) return std::nullopt;
            return (tp_ + tn_) / w;
        }
        case MetricKind::Precision: {
            if (tp_ + fp_ == 0.0) return std::nullopt;
            return tp_ / (tp_ + fp_);
        }
        case MetricKind::Recall: {
            if (tp_ + fn_ == 0.0) return std::nullopt;
            return tp_ / (tp_ + fn_);
        }
        case MetricKind::F1: {
            if (tp_ + fp_ == 0.0 || tp_ + fn_ == 0.0) return std::nullopt;
            const double precision = tp_ / (tp_ + fp_);
            const double recall = tp_ / (tp_ + fn_);
            if (precision + recall == 0.0) return std::nullopt;
            return 2.0 * precision * recall / (precision + recall);
        }
        case MetricKind::Auc: {
            double total_pos = 0, total_neg = 0;
            for (double v : pos_) total_pos += v;
            for (double v : neg_) total_neg += v;
            if (total_pos == 0.0 || total_neg == 0.0) return std::nullopt;
            // Pairwise concordance over buckets; same-bucket pairs tie at 0.5.
            double concordant = 0, neg_below = 0;
            for (int b = 0; b < cfg_.auc_buckets; ++b) {
                concordant += pos_[b] * (neg_below + 0.5 * neg_[b]);
                neg_below += neg_[b];
            }
            return concordant / (total_pos * total_neg);
        }
        case MetricKind::LogLoss: {
            if (weight_sum_ == 0.0) return std::nullopt;
            return loss_sum_ / weight_sum_;
        }
    }
    return std::nullopt;
}

}  // namespace slicescope
