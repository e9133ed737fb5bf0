#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "slicescope/evaluator.hpp"
#include "slicescope/stats.hpp"

namespace slicescope {

enum class Strategy { Batch, Iterative, Priority };

// Queue order for the priority strategy. PValue is the intended score;
// Random and BreadthFirst exist as uninformed baselines.
enum class PriorityScore { PValue, Random, BreadthFirst };

struct SearchConfig {
    Strategy strategy = Strategy::Iterative;
    size_t max_cross_size = 3;
    uint64_t min_slice_size = 1;
    double alpha = 0.01;
    int replicates = 20;
    uint64_t seed = 0;
    DiffMode mode = DiffMode::VsOverall;
    MetricConfig metric;
    DirectionFilter wanted = DirectionFilter::Lower;
    int workers = 1;

    // Priority strategy only.
    std::optional<double> k_per_iteration;  // unset: 12% of the batch space
    int iterations = 5;
    PriorityScore priority_score = PriorityScore::PValue;

    // Untestable slices are dropped from the frontier unless set.
    bool expand_untestable = false;
    // Retain a stat for every evaluated nonempty slice (verbose reports).
    bool keep_all = false;
};

struct IterationStats {
    int iteration = 0;
    uint64_t generated = 0;            // candidates sent to evaluation
    uint64_t nonempty = 0;
    uint64_t significant = 0;          // newly significant after the size filter
    uint64_t pruned = 0;               // rejected against settled slices
    uint64_t duplicates = 0;
    double estimated_nonempty = 0;     // nonempty-rate estimate at generation time
    uint64_t cumulative_generated = 0;
};

struct SearchOutcome {
    // Maximal significant slices (none contained in another reported slice),
    // sorted by ascending p, then descending size, then predicate.
    std::vector<SliceStat> significant;
    // Every evaluated nonempty slice in evaluation order (keep_all only).
    std::vector<SliceStat> evaluated;
    std::vector<IterationStats> iterations;
    SliceStat overall;
    uint64_t candidates_evaluated = 0;
    double evaluator_cpu_seconds = 0;
    double wall_seconds = 0;
    double resolved_k = 0;             // priority: K after applying the default rule
};

// Running nonempty/seen counters per cross size. Lookup falls back to the
// next smaller cross size with data, and to 1.0 when nothing has been seen.
struct NonemptyRates {
    std::vector<uint64_t> seen;
    std::vector<uint64_t> nonempty;

    explicit NonemptyRates(size_t max_cross)
        : seen(max_cross + 1, 0), nonempty(max_cross + 1, 0) {}
    void record(size_t cross, bool was_nonempty) {
        seen[cross]++;
        if (was_nonempty) nonempty[cross]++;
    }
    double lookup(size_t cross) const;
};

// Drops every slice that is a sub-slice of another significant input.
std::vector<SliceStat> maximal_filter(const std::vector<SliceStat>& slices);

using ProgressFn = std::function<void(const IterationStats&)>;

SearchOutcome run_search(const EncodedDataset& data, const SearchConfig& config,
                         const ProgressFn& progress = nullptr);

// Strategy-pinned wrappers.
SearchOutcome run_batch(const EncodedDataset& data, SearchConfig config,
                        const ProgressFn& progress = nullptr);
SearchOutcome run_iterative(const EncodedDataset& data, SearchConfig config,
                            const ProgressFn& progress = nullptr);
SearchOutcome run_priority(const EncodedDataset& data, SearchConfig config,
                           const ProgressFn& progress = nullptr);

}  // namespace slicescope
