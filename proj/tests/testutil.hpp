#pragma once

// Shared synthetic datasets and independent oracles for the test suites.
// Oracles here recompute results from first principles (row filtering, direct
// metric formulas, quadrature) and never reuse the library's evaluation path.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "slicescope/evaluator.hpp"
#include "slicescope/metrics.hpp"
#include "slicescope/predicate.hpp"
#include "slicescope/schema.hpp"
#include "slicescope/stats.hpp"

namespace testutil {

using namespace slicescope;

inline Predicate pred(std::vector<std::pair<uint32_t, int32_t>> atoms) {
    std::vector<SingletonPredicate> list;
    for (auto [f, v] : atoms) list.push_back({f, v});
    return Predicate::from_atoms(std::move(list));
}

inline std::set<Predicate> predicate_set(const std::vector<SliceStat>& stats) {
    std::set<Predicate> out;
    for (const auto& s : stats) out.insert(s.predicate);
    return out;
}

// ============================================================================
// Oracles
// ============================================================================

// Naive row filter: scan every row against every atom.
inline std::vector<size_t> slice_rows(const EncodedDataset& data, const Predicate& p) {
    std::vector<size_t> rows;
    for (size_t r = 0; r < data.n_rows; ++r) {
        bool ok = true;
        for (const auto& a : p.atoms()) {
            if (data.row(r)[a.feature] != a.value) {
                ok = false;
                break;
            }
        }
        if (ok) rows.push_back(r);
    }
    return rows;
}

// Exact pairwise AUC: O(n^2) concordance count with 0.5 for score ties.
inline std::optional<double> exact_auc(const std::vector<int>& labels,
                                       const std::vector<double>& scores,
                                       const std::vector<double>& weights = {}) {
    double num = 0, wpos = 0, wneg = 0;
    auto w = [&](size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    for (size_t i = 0; i < labels.size(); ++i) {
        (labels[i] == 1 ? wpos : wneg) += w(i);
    }
    if (wpos == 0 || wneg == 0) return std::nullopt;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        for (size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j]) {
                num += w(i) * w(j);
            } else if (scores[i] == scores[j]) {
                num += 0.5 * w(i) * w(j);
            }
        }
    }
    return num / (wpos * wneg);
}

// Direct metric formulas over (label, score, weight) triples. AUC mirrors the
// metric definition (bucketed scores, pairwise over buckets) but by a dumb
// O(n^2) pair loop rather than the accumulator.
inline std::optional<double> metric_oracle(const MetricConfig& cfg,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& scores,
                                           const std::vector<double>& weights = {}) {
    auto w = [&](size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    const size_t n = labels.size();
    switch (cfg.kind) {
        case MetricKind::Accuracy:
        case MetricKind::Precision:
        case MetricKind::Recall:
        case MetricKind::F1: {
            double tp = 0, fp = 0, tn = 0, fn = 0;
            for (size_t i = 0; i < n; ++i) {
                const bool predicted = scores[i] >= cfg.threshold;
                if (labels[i] == 1) {
                    (predicted ? tp : fn) += w(i);
                } else {
                    (predicted ? fp : tn) += w(i);
                }
            }
            const double total = tp + fp + tn + fn;
            if (cfg.kind == MetricKind::Accuracy) {
                if (total == 0) return std::nullopt;
                return (tp + tn) / total;
            }
            if (cfg.kind == MetricKind::Precision) {
                if (tp + fp == 0) return std::nullopt;
                return tp / (tp + fp);
            }
            if (cfg.kind == MetricKind::Recall) {
                if (tp + fn == 0) return std::nullopt;
                return tp / (tp + fn);
            }
            if (tp + fp == 0 || tp + fn == 0) return std::nullopt;
            const double prec = tp / (tp + fp);
            const double rec = tp / (tp + fn);
            if (prec + rec == 0) return std::nullopt;
            return 2 * prec * rec / (prec + rec);
        }
        case MetricKind::Auc: {
            std::vector<double> bucketed(n);
            for (size_t i = 0; i < n; ++i) {
                bucketed[i] = std::min<double>(
                    static_cast<int>(scores[i] * cfg.auc_buckets), cfg.auc_buckets - 1);
            }
            return exact_auc(labels, bucketed, weights);
        }
        case MetricKind::LogLoss: {
            double loss = 0, wsum = 0;
            for (size_t i = 0; i < n; ++i) {
                const double s = std::min(1.0 - 1e-7, std::max(1e-7, scores[i]));
                loss += w(i) * (labels[i] == 1 ? -std::log(s) : -std::log(1.0 - s));
                wsum += w(i);
            }
            if (wsum == 0) return std::nullopt;
            return loss / wsum;
        }
    }
    return std::nullopt;
}

// Point metric of a slice by filter-then-compute, for model `model`.
inline std::optional<double> slice_metric_oracle(const EncodedDataset& data,
                                                 const Predicate& p,
                                                 const MetricConfig& cfg,
                                                 size_t model = 0) {
    std::vector<int> labels;
    std::vector<double> scores;
    for (size_t r : slice_rows(data, p)) {
        labels.push_back(data.labels[r]);
        scores.push_back(data.scores[model][r]);
    }
    if (labels.empty()) return std::nullopt;
    return metric_oracle(cfg, labels, scores);
}

// Student-t density.
inline double t_pdf(double x, double df) {
    const double c = std::lgamma((df + 1) / 2.0) - std::lgamma(df / 2.0) -
                     0.5 * std::log(df * 3.14159265358979323846);
    return std::exp(c - (df + 1) / 2.0 * std::log1p(x * x / df));
}

// Two-sided tail probability by composite Simpson quadrature of the density.
inline double t_two_sided_p_oracle(double t, int df) {
    const double hi = std::fabs(t);
    if (hi == 0) return 1.0;
    const int steps = 200000;  // even
    const double h = hi / steps;
    double sum = t_pdf(0, df) + t_pdf(hi, df);
    for (int i = 1; i < steps; ++i) {
        sum += t_pdf(i * h, df) * (i % 2 ? 4.0 : 2.0);
    }
    const double integral = sum * h / 3.0;
    return std::clamp(1.0 - 2.0 * integral, 0.0, 1.0);
}

// ============================================================================
// Synthetic datasets
// ============================================================================

struct Plant {
    std::vector<std::pair<uint32_t, int32_t>> atoms;
    double accuracy = 0.1;
    Predicate predicate() const { return pred(atoms); }
};

struct SynthSpec {
    uint64_t seed = 1;
    size_t n_rows = 2000;
    std::vector<int32_t> domains;     // one categorical feature per entry
    double base_accuracy = 0.9;
    double label_rate = 0.5;
    std::vector<Plant> plants;
    // Hard coupling: value of feature `couple_to` is forced into
    // {v, (v+1) mod domain} of feature `couple_from`, creating empty combos.
    int couple_from = -1;
    int couple_to = -1;
    // Baseline model accuracy; negative = single-model dataset.
    double baseline_accuracy = -1.0;
    bool identical_baseline = false;
};

inline EncodedDataset build_synth(const SynthSpec& spec) {
    FeatureSchema schema;
    for (size_t f = 0; f < spec.domains.size(); ++f) {
        FeatureEntry e;
        e.name = "f" + std::to_string(f);
        e.kind = FeatureKind::Categorical;
        for (int32_t v = 0; v < spec.domains[f]; ++v) {
            e.categories.push_back("v" + std::to_string(v));
        }
        schema.features.push_back(std::move(e));
    }

    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + 0x1234567);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    EncodedDataset data;
    data.schema = schema;
    data.n_rows = spec.n_rows;
    const size_t nf = spec.domains.size();
    data.values.resize(spec.n_rows * nf);
    data.labels.resize(spec.n_rows);
    data.model_ids.push_back("model");
    data.scores.emplace_back(spec.n_rows);
    const bool with_baseline = spec.baseline_accuracy >= 0.0 || spec.identical_baseline;
    if (with_baseline) {
        data.model_ids.push_back("baseline");
        data.scores.emplace_back(spec.n_rows);
    }

    auto draw_score = [&](int label, double accuracy) {
        const bool correct = uni(rng) < accuracy;
        const double hi = 0.85 + 0.1 * uni(rng);
        return correct == (label == 1) ? hi : 1.0 - hi;
    };

    for (size_t r = 0; r < spec.n_rows; ++r) {
        for (size_t f = 0; f < nf; ++f) {
            data.values[r * nf + f] =
                static_cast<int32_t>(rng() % static_cast<uint64_t>(spec.domains[f]));
        }
        if (spec.couple_from >= 0 && spec.couple_to >= 0) {
            const int32_t base = data.values[r * nf + spec.couple_from];
            const int32_t offset = static_cast<int32_t>(rng() % 2);
            data.values[r * nf + spec.couple_to] =
                (base + offset) % spec.domains[spec.couple_to];
        }
        const int label = uni(rng) < spec.label_rate ? 1 : 0;
        data.labels[r] = static_cast<uint8_t>(label);

        double accuracy = spec.base_accuracy;
        for (const auto& plant : spec.plants) {
            bool inside = true;
            for (auto [f, v] : plant.atoms) {
                if (data.values[r * nf + f] != v) {
                    inside = false;
                    break;
                }
            }
            if (inside) accuracy = std::min(accuracy, plant.accuracy);
        }
        data.scores[0][r] = draw_score(label, accuracy);
        if (with_baseline) {
            data.scores[1][r] = spec.identical_baseline
                                    ? data.scores[0][r]
                                    : draw_score(label, spec.baseline_accuracy);
        }
    }
    return data;
}

// Random mixed-type dataset exercised through the ingestion path.
inline RawDataset random_raw_dataset(uint64_t seed, size_t max_rows = 1000,
                                     size_t max_features = 6, double missing_rate = 0.03) {
    std::mt19937_64 rng(seed * 0x2545F4914F6CDD1Dull + 99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const size_t n_rows = 50 + rng() % (max_rows - 49);
    const size_t n_features = 2 + rng() % (max_features - 1);

    RawDataset ds;
    ds.n_rows = n_rows;
    for (size_t f = 0; f < n_features; ++f) {
        RawColumn col;
        col.name = "f" + std::to_string(f);
        const bool numeric = rng() % 2 == 0;
        col.kind = numeric ? FeatureKind::Numeric : FeatureKind::Categorical;
        const int domain = 2 + static_cast<int>(rng() % 5);
        for (size_t r = 0; r < n_rows; ++r) {
            if (uni(rng) < missing_rate) {
                col.raw.emplace_back();
                if (numeric) col.numeric.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            if (numeric) {
                const double v = std::round(uni(rng) * 1000) / 10.0;
                col.raw.push_back(format_g9(v));
                col.numeric.push_back(v);
            } else {
                col.raw.push_back(std::string(1, static_cast<char>('a' + rng() % domain)));
            }
        }
        ds.features.push_back(std::move(col));
    }
    for (size_t r = 0; r < n_rows; ++r) {
        ds.labels.push_back(static_cast<uint8_t>(rng() % 2));
    }
    return ds;
}

inline PredictionSet random_predictions(uint64_t seed, const RawDataset& ds,
                                        const std::string& model_id = "model") {
    std::mt19937_64 rng(seed ^ 0xABCDEF0123456789ull);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PredictionSet p;
    p.model_id = model_id;
    for (size_t r = 0; r < ds.n_rows; ++r) {
        // Scores lean toward the label so some slices carry signal.
        const double noise = uni(rng);
        p.scores.push_back(ds.labels[r] == 1 ? 0.3 + 0.7 * noise : 0.7 * noise);
    }
    return p;
}

// ============================================================================
// Temp files for CLI round trips
// ============================================================================

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("slicescope_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

struct CsvFixture {
    std::string data_path;
    std::string predictions_path;
    std::string baseline_path;
    std::string planted_rendering;  // e.g. "f0=a AND f1=x"
};

// Dataset CSV with three categorical and one numeric column, predictions from
// an accurate model degraded inside the slice (f0=a AND f1=x), plus an
// everywhere-accurate baseline file.
inline CsvFixture write_planted_csv(const TempDir& dir, uint64_t seed, size_t n_rows = 1500,
                                    double inside_accuracy = 0.05) {
    std::mt19937_64 rng(seed * 7919 + 13);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const char* f0_vals[] = {"a", "b", "c"};
    const char* f1_vals[] = {"x", "y", "z"};
    const char* f2_vals[] = {"p", "q"};

    CsvFixture fx;
    fx.data_path = dir.file("data.csv");
    fx.predictions_path = dir.file("model.csv");
    fx.baseline_path = dir.file("baseline.csv");
    fx.planted_rendering = "f0=a AND f1=x";

    std::ofstream data(fx.data_path);
    std::ofstream model(fx.predictions_path);
    std::ofstream baseline(fx.baseline_path);
    data << "f0,f1,f2,num0,label\n";
    model << "row_index,score\n";
    baseline << "row_index,score\n";
    for (size_t r = 0; r < n_rows; ++r) {
        const char* f0 = f0_vals[rng() % 3];
        const char* f1 = f1_vals[rng() % 3];
        const char* f2 = f2_vals[rng() % 2];
        const double num0 = std::round(uni(rng) * 1000) / 10.0;
        const int label = rng() % 2 ? 1 : 0;
        data << f0 << ',' << f1 << ',' << f2 << ',' << num0 << ',' << label << "\n";

        const bool inside = std::string(f0) == "a" && std::string(f1) == "x";
        const double accuracy = inside ? inside_accuracy : 0.95;
        const bool correct = uni(rng) < accuracy;
        const double s = correct == (label == 1) ? 0.9 : 0.1;
        model << r << ',' << s << "\n";
        const bool base_correct = uni(rng) < 0.95;
        baseline << r << ',' << (base_correct == (label == 1) ? 0.9 : 0.1) << "\n";
    }
    return fx;
}

}  // namespace testutil
