#include "slicescope/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <stdexcept>
#include <thread>

#include "slicescope/bootstrap.hpp"

namespace slicescope {

std::vector<size_t> extract_slice_keys(const EncodedDataset& data, size_t row,
                                       std::span<const Predicate> candidates) {
    std::vector<size_t> out;
    const auto values = data.row(row);
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i].matches(values)) out.push_back(i);
    }
    return out;
}

namespace {

// Inverted index from (feature, value) atoms to candidate ids. A row's
// matches are found by bumping a counter for every candidate that shares one
// of the row's atoms; a candidate matches iff its counter reaches its arity.
struct Postings {
    std::vector<uint32_t> feature_offset;          // per feature, into lists
    std::vector<std::vector<uint32_t>> lists;      // per (feature, value)
    std::vector<uint32_t> arity;
    std::vector<uint32_t> always;                  // arity-0 candidates
};

Postings build_postings(const FeatureSchema& schema, std::span<const Predicate> candidates) {
    Postings p;
    p.feature_offset.resize(schema.feature_count() + 1, 0);
    for (size_t f = 0; f < schema.feature_count(); ++f) {
        p.feature_offset[f + 1] =
            p.feature_offset[f] + static_cast<uint32_t>(schema.features[f].domain_size());
    }
    p.lists.resize(p.feature_offset.back());
    p.arity.resize(candidates.size());
    for (size_t c = 0; c < candidates.size(); ++c) {
        const auto& atoms = candidates[c].atoms();
        p.arity[c] = static_cast<uint32_t>(atoms.size());
        if (atoms.empty()) {
            p.always.push_back(static_cast<uint32_t>(c));
            continue;
        }
        for (const auto& a : atoms) {
            p.lists[p.feature_offset[a.feature] + a.value].push_back(
                static_cast<uint32_t>(c));
        }
    }
    return p;
}

struct Partials {
    std::vector<MetricAccumulator> test;       // [candidate * (B+1) + b]
    std::vector<MetricAccumulator> ref;        // VsBaseline only
    std::vector<uint64_t> sizes;               // unweighted matches per candidate
};

// Accumulates one worker's row range for one chunk of candidates.
void accumulate_rows(const EncodedDataset& data, const EvaluationRequest& req,
                     const Postings& postings, std::span<const uint8_t> weights,
                     size_t row_begin, size_t row_end, Partials& out) {
    const size_t slots = req.replicates + 1;
    const size_t n_features = data.schema.feature_count();
    const size_t n_candidates = out.sizes.size();
    const bool baseline = req.mode == DiffMode::VsBaseline;

    std::vector<uint32_t> count(n_candidates, 0);
    std::vector<uint32_t> stamp(n_candidates, 0);
    std::vector<uint32_t> touched;
    touched.reserve(64);

    for (size_t r = row_begin; r < row_end; ++r) {
        const int32_t* row = data.values.data() + r * n_features;
        const int label = data.labels[r];
        const double score = data.scores[0][r];
        const double base_score = baseline ? data.scores[1][r] : 0.0;
        const uint8_t* w = weights.data() + r * slots;
        const uint32_t mark = static_cast<uint32_t>(r) + 1;

        touched.clear();
        for (size_t f = 0; f < n_features; ++f) {
            const int32_t v = row[f];
            if (v < 0) continue;
            for (uint32_t cid : postings.lists[postings.feature_offset[f] + v]) {
                if (stamp[cid] != mark) {
                    stamp[cid] = mark;
                    count[cid] = 1;
                    touched.push_back(cid);
                } else {
                    ++count[cid];
                }
            }
        }

        auto emit = [&](uint32_t cid) {
            out.sizes[cid]++;
            const size_t base = cid * slots;
            for (size_t b = 0; b < slots; ++b) {
                if (w[b] == 0) continue;
                out.test[base + b].add(label, score, w[b]);
                if (baseline) out.ref[base + b].add(label, base_score, w[b]);
            }
        };
        for (uint32_t cid : postings.always) emit(cid);
        for (uint32_t cid : touched) {
            if (count[cid] == postings.arity[cid]) emit(cid);
        }
    }
}

std::vector<std::optional<double>> extract_all(std::span<const MetricAccumulator> accs) {
    std::vector<std::optional<double>> out;
    out.reserve(accs.size());
    for (const auto& acc : accs) out.push_back(acc.extract());
    return out;
}

SliceEvaluation extract_slice(const Predicate& predicate, uint64_t size,
                              std::span<const MetricAccumulator> test,
                              std::span<const std::optional<double>> ref, size_t slots) {
    SliceEvaluation ev;
    ev.predicate = predicate;
    ev.size = size;
    ev.slice_metric = test[0].extract();
    ev.ref_metric = ref[0];
    if (ev.slice_metric && ev.ref_metric) {
        ev.point_delta = *ev.slice_metric - *ev.ref_metric;
    }
    ev.deltas.reserve(slots - 1);
    for (size_t b = 1; b < slots; ++b) {
        const auto a = test[b].extract();
        if (a && ref[b]) {
            ev.deltas.push_back(*a - *ref[b]);
        } else {
            ev.dropped++;
        }
    }
    return ev;
}

}  // namespace

EvaluationResult evaluate(const EncodedDataset& data, const EvaluationRequest& req) {
    if (req.replicates < 1) {
        throw std::invalid_argument("evaluate: replicate count must be >= 1");
    }
    if (req.workers < 1) {
        throw std::invalid_argument("evaluate: worker count must be >= 1");
    }
    if (data.scores.empty()) {
        throw std::invalid_argument("evaluate: dataset carries no prediction scores");
    }
    if (req.mode == DiffMode::VsBaseline && data.scores.size() < 2) {
        throw std::invalid_argument("evaluate: baseline mode needs two prediction sets");
    }

    const auto wall_start = std::chrono::steady_clock::now();
    const std::clock_t cpu_start = std::clock();

    const size_t n_rows = data.n_rows;
    const size_t slots = static_cast<size_t>(req.replicates) + 1;
    const size_t n_workers =
        std::max<size_t>(1, std::min<size_t>(req.workers, std::max<size_t>(1, n_rows)));
    const bool vs_baseline = req.mode == DiffMode::VsBaseline;

    // Replicate weights, recomputed from (seed, replicate, row) so that
    // assignments are identical for any worker count or candidate batch.
    std::vector<uint8_t> weights(n_rows * slots);
    for (size_t r = 0; r < n_rows; ++r) {
        weights[r * slots] = 1;
        for (size_t b = 1; b < slots; ++b) {
            const uint32_t w = poisson_weight(req.seed, static_cast<uint32_t>(b), r);
            weights[r * slots + b] = static_cast<uint8_t>(std::min<uint32_t>(w, 255));
        }
    }

    auto row_range = [&](size_t w) {
        const size_t lo = n_rows * w / n_workers;
        const size_t hi = n_rows * (w + 1) / n_workers;
        return std::pair{lo, hi};
    };

    // Overall-slice accumulators: the reference side of VsOverall diffs and
    // the overall report record. model 0 = tested model, model 1 = baseline.
    const MetricAccumulator proto{req.metric};
    const size_t n_overall_models = vs_baseline ? 2 : 1;
    std::vector<std::vector<MetricAccumulator>> overall_acc(
        n_overall_models, std::vector<MetricAccumulator>(slots, proto));
    {
        std::vector<std::vector<std::vector<MetricAccumulator>>> worker_acc(
            n_workers, overall_acc);
        auto overall_job = [&](size_t w) {
            auto [lo, hi] = row_range(w);
            auto& acc = worker_acc[w];
            for (size_t r = lo; r < hi; ++r) {
                const int label = data.labels[r];
                const uint8_t* wr = weights.data() + r * slots;
                for (size_t b = 0; b < slots; ++b) {
                    if (wr[b] == 0) continue;
                    for (size_t m = 0; m < n_overall_models; ++m) {
                        acc[m][b].add(label, data.scores[m][r], wr[b]);
                    }
                }
            }
        };
        if (n_workers == 1) {
            overall_job(0);
        } else {
            std::vector<std::thread> threads;
            for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(overall_job, w);
            for (auto& t : threads) t.join();
        }
        for (size_t w = 0; w < n_workers; ++w) {
            for (size_t m = 0; m < n_overall_models; ++m) {
                for (size_t b = 0; b < slots; ++b) {
                    overall_acc[m][b].merge(worker_acc[w][m][b]);
                }
            }
        }
    }

    EvaluationResult result;
    result.slices.reserve(req.candidates.size());

    // The overall slice is the shared reference side of every VsOverall diff;
    // extract its per-replicate values once.
    const auto overall_values = extract_all(overall_acc[0]);

    // Candidate chunks keep per-worker accumulator memory bounded.
    const size_t acc_bytes =
        sizeof(MetricAccumulator) +
        (req.metric.kind == MetricKind::Auc ? 2 * req.metric.auc_buckets * sizeof(double) : 0);
    const size_t per_candidate = slots * acc_bytes * (vs_baseline ? 2 : 1) * n_workers;
    const size_t chunk_size =
        std::clamp<size_t>(req.accumulator_budget_bytes / std::max<size_t>(per_candidate, 1),
                           1, std::max<size_t>(req.candidates.size(), 1));

    for (size_t chunk_begin = 0; chunk_begin < req.candidates.size();
         chunk_begin += chunk_size) {
        const size_t chunk_end =
            std::min(chunk_begin + chunk_size, req.candidates.size());
        const std::span<const Predicate> chunk{req.candidates.data() + chunk_begin,
                                               chunk_end - chunk_begin};
        const Postings postings = build_postings(data.schema, chunk);

        std::vector<Partials> partials;
        partials.reserve(n_workers);
        for (size_t w = 0; w < n_workers; ++w) {
            Partials p;
            p.test.assign(chunk.size() * slots, proto);
            if (vs_baseline) p.ref.assign(chunk.size() * slots, proto);
            p.sizes.assign(chunk.size(), 0);
            partials.push_back(std::move(p));
        }

        auto job = [&](size_t w) {
            auto [lo, hi] = row_range(w);
            accumulate_rows(data, req, postings, weights, lo, hi, partials[w]);
        };
        if (n_workers == 1) {
            job(0);
        } else {
            std::vector<std::thread> threads;
            for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(job, w);
            for (auto& t : threads) t.join();
        }

        Partials& merged = partials[0];
        for (size_t w = 1; w < n_workers; ++w) {
            for (size_t i = 0; i < merged.test.size(); ++i) {
                merged.test[i].merge(partials[w].test[i]);
            }
            for (size_t i = 0; i < merged.ref.size(); ++i) {
                merged.ref[i].merge(partials[w].ref[i]);
            }
            for (size_t i = 0; i < merged.sizes.size(); ++i) {
                merged.sizes[i] += partials[w].sizes[i];
            }
        }

        for (size_t c = 0; c < chunk.size(); ++c) {
            if (merged.sizes[c] == 0) continue;  // empty slices are absent
            const std::span<const MetricAccumulator> test{merged.test.data() + c * slots,
                                                          slots};
            std::vector<std::optional<double>> baseline_values;
            std::span<const std::optional<double>> ref{overall_values};
            if (vs_baseline) {
                baseline_values = extract_all({merged.ref.data() + c * slots, slots});
                ref = baseline_values;
            }
            result.slices.push_back(extract_slice(chunk[c], merged.sizes[c], test, ref, slots));
        }
    }

    const auto overall_ref = vs_baseline ? extract_all(overall_acc[1]) : overall_values;
    result.overall = extract_slice(Predicate{}, n_rows,
                                   std::span<const MetricAccumulator>{overall_acc[0]},
                                   overall_ref, slots);

    result.cpu_seconds =
        static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

SliceEvaluation overall_evaluation(const EncodedDataset& data,
                                   const EvaluationRequest& request) {
    EvaluationRequest req = request;
    req.candidates = {Predicate{}};
    return evaluate(data, req).overall;
}

}  // namespace slicescope
