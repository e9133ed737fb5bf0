#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slicescope/metrics.hpp"
#include "slicescope/predicate.hpp"
#include "slicescope/schema.hpp"

namespace slicescope {

enum class DiffMode { VsOverall, VsBaseline };

struct EvaluationRequest {
    std::vector<Predicate> candidates;
    MetricConfig metric;
    DiffMode mode = DiffMode::VsOverall;
    int replicates = 20;    // B; replicate 0 (point estimate) comes on top
    uint64_t seed = 0;
    int workers = 1;
    // Cap on live accumulator memory; large candidate sets are processed in
    // chunks of whatever fits. Results do not depend on the chunking.
    size_t accumulator_budget_bytes = 512ull << 20;
};

struct SliceEvaluation {
    Predicate predicate;
    uint64_t size = 0;                       // unweighted matched row count
    std::optional<double> slice_metric;      // point metric, tested model on the slice
    std::optional<double> ref_metric;        // point metric of the reference side
    std::optional<double> point_delta;       // slice_metric - ref_metric, replicate 0
    std::vector<double> deltas;              // usable replicate deltas (b >= 1)
    int dropped = 0;                         // replicates where either side was undefined

    bool untestable() const { return deltas.empty(); }
};

struct EvaluationResult {
    // Nonempty candidates only, in candidate order.
    std::vector<SliceEvaluation> slices;
    // The always-true slice under the same request (reference side: the
    // baseline model in VsBaseline mode, itself in VsOverall mode).
    SliceEvaluation overall;
    double cpu_seconds = 0;
    double wall_seconds = 0;
};

// Candidates whose singletons all match the example's encoded values
// (indices into `candidates`). Missing values match nothing.
std::vector<size_t> extract_slice_keys(const EncodedDataset& data, size_t row,
                                       std::span<const Predicate> candidates);

// Matches every row against the candidate set, reduces (label, score) pairs
// per (candidate, replicate, model) into metric accumulators under Poisson
// bootstrap weights, and extracts per-slice metric differences. Rows are
// partitioned across workers; partial accumulators merge associatively, so
// results are independent of the partitioning up to float association.
EvaluationResult evaluate(const EncodedDataset& data, const EvaluationRequest& request);

// evaluate() restricted to the always-true predicate.
SliceEvaluation overall_evaluation(const EncodedDataset& data, const EvaluationRequest& request);

}  // namespace slicescope
