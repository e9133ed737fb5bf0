#include "slicescope/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "slicescope/bootstrap.hpp"

namespace slicescope {

double NonemptyRates::lookup(size_t cross) const {
    size_t l = std::min(cross, seen.size() - 1);
    // No observations at this cross size: fall back to the next smaller one.
    for (; l >= 1; --l) {
        if (seen[l] > 0) {
            return static_cast<double>(nonempty[l]) / static_cast<double>(seen[l]);
        }
    }
    return 1.0;
}

std::vector<SliceStat> maximal_filter(const std::vector<SliceStat>& slices) {
    std::vector<SliceStat> out;
    for (const auto& s : slices) {
        bool covered = false;
        for (const auto& other : slices) {
            if (&other == &s) continue;
            if (is_subslice(s.predicate, other.predicate)) {
                covered = true;
                break;
            }
        }
        if (!covered) out.push_back(s);
    }
    return out;
}

namespace {

void validate(const SearchConfig& cfg) {
    if (cfg.max_cross_size < 1) throw ConfigError("max cross size must be >= 1");
    if (cfg.min_slice_size < 1) throw ConfigError("min slice size must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    if (cfg.replicates < 1) throw ConfigError("replicate count must be >= 1");
    if (cfg.workers < 1) throw ConfigError("worker count must be >= 1");
    if (cfg.strategy == Strategy::Priority) {
        if (cfg.iterations < 1) throw ConfigError("iteration count must be >= 1");
        if (cfg.k_per_iteration && !(*cfg.k_per_iteration >= 1.0)) {
            throw ConfigError("candidates per iteration must be >= 1");
        }
    }
}

struct QueueEntry {
    double score = 0;
    uint64_t size = 0;
    Predicate predicate;
};

// Pops ascending score; ties prefer larger slices, then lexicographically
// smaller predicates. Total order, so pop order is deterministic.
struct QueueCompare {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.score != b.score) return a.score > b.score;
        if (a.size != b.size) return a.size < b.size;
        return a.predicate > b.predicate;
    }
};

class Driver {
public:
    Driver(const EncodedDataset& data, const SearchConfig& cfg, const ProgressFn& progress)
        : data_(data),
          cfg_(cfg),
          progress_(progress),
          rates_(cfg.max_cross_size) {}

    SearchOutcome run() {
        const auto wall_start = std::chrono::steady_clock::now();
        switch (cfg_.strategy) {
            case Strategy::Batch: run_batch(); break;
            case Strategy::Iterative: run_iterative(); break;
            case Strategy::Priority: run_priority(); break;
        }
        out_.significant = maximal_filter(significant_);
        std::sort(out_.significant.begin(), out_.significant.end(),
                  [](const SliceStat& a, const SliceStat& b) {
                      if (a.p != b.p) return a.p < b.p;
                      if (a.size != b.size) return a.size > b.size;
                      return a.predicate < b.predicate;
                  });
        out_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                .count();
        return std::move(out_);
    }

private:
    struct Round {
        std::vector<SliceStat> frontier;   // nonsignificant, big enough, expandable
        IterationStats stats;
    };

    EvaluationRequest request(std::vector<Predicate> candidates) const {
        EvaluationRequest req;
        req.candidates = std::move(candidates);
        req.metric = cfg_.metric;
        req.mode = cfg_.mode;
        req.replicates = cfg_.replicates;
        req.seed = cfg_.seed;
        req.workers = cfg_.workers;
        return req;
    }

    // Evaluates one round of candidates, classifies the nonempty results and
    // settles every slice: significant ones and too-small ones enter the
    // prune sets, the rest form the next frontier.
    Round evaluate_round(std::vector<Predicate> candidates, int iteration,
                         const ExpandStats& expand_stats, double estimated_nonempty) {
        Round round;
        round.stats.iteration = iteration;
        round.stats.generated = candidates.size();
        round.stats.pruned = expand_stats.pruned;
        round.stats.duplicates = expand_stats.duplicates;
        round.stats.estimated_nonempty = estimated_nonempty;
        out_.candidates_evaluated += candidates.size();
        round.stats.cumulative_generated = out_.candidates_evaluated;

        EvaluationResult result = evaluate(data_, request(candidates));
        out_.evaluator_cpu_seconds += result.cpu_seconds;
        round.stats.nonempty = result.slices.size();
        out_.overall = classify(result.overall, cfg_.alpha, cfg_.wanted);

        // result.slices preserves candidate order; anything skipped between
        // consecutive results matched no example.
        size_t next = 0;
        for (const auto& candidate : candidates) {
            const bool nonempty =
                next < result.slices.size() && result.slices[next].predicate == candidate;
            rates_.record(candidate.cross_size(), nonempty);
            if (!nonempty) {
                // An empty slice can only shrink further down the lattice.
                prune_.insert(candidate);
                continue;
            }
            const SliceEvaluation& ev = result.slices[next++];
            SliceStat stat = classify(ev, cfg_.alpha, cfg_.wanted);
            stat.iteration = iteration;
            if (cfg_.keep_all) out_.evaluated.push_back(stat);

            if (stat.size < cfg_.min_slice_size) {
                prune_.insert(stat.predicate);  // sub-slices can only be smaller
                continue;
            }
            if (stat.significant) {
                prune_.insert(stat.predicate);
                significant_.push_back(stat);
                round.stats.significant++;
                continue;
            }
            if (stat.testable || cfg_.expand_untestable) {
                round.frontier.push_back(std::move(stat));
            }
        }
        out_.iterations.push_back(round.stats);
        if (progress_) progress_(round.stats);
        return round;
    }

    void run_batch() {
        std::vector<Predicate> candidates;
        for (size_t l = 1; l <= cfg_.max_cross_size; ++l) {
            for_each_in_layer(data_.schema, l,
                              [&](const Predicate& p) { candidates.push_back(p); });
        }
        const double estimated = estimate_nonempty(candidates);
        evaluate_round(std::move(candidates), 1, {}, estimated);
    }

    void run_iterative() {
        std::vector<Predicate> frontier{Predicate{}};
        for (size_t l = 1; l <= cfg_.max_cross_size; ++l) {
            std::vector<Predicate> candidates;
            ExpandStats es;
            for (const auto& base : frontier) {
                auto fresh = expand(base, data_.schema, prune_, cfg_.max_cross_size,
                                    dedupe_, &es);
                std::move(fresh.begin(), fresh.end(), std::back_inserter(candidates));
            }
            if (candidates.empty()) break;
            const double estimated = estimate_nonempty(candidates);
            Round round =
                evaluate_round(std::move(candidates), static_cast<int>(l), es, estimated);
            frontier.clear();
            for (auto& stat : round.frontier) frontier.push_back(stat.predicate);
        }
    }

    void run_priority() {
        const double batch_space = batch_space_size(data_.schema, cfg_.max_cross_size);
        const double k_target = cfg_.k_per_iteration
                                    ? *cfg_.k_per_iteration
                                    : std::max(1.0, std::ceil(0.12 * batch_space));
        out_.resolved_k = k_target;

        std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueCompare> queue;
        auto push_frontier = [&](const std::vector<SliceStat>& frontier) {
            for (const auto& stat : frontier) {
                // A base at the cross-size cap cannot be subdivided.
                if (stat.predicate.cross_size() >= cfg_.max_cross_size) continue;
                queue.push({priority_of(stat), stat.size, stat.predicate});
            }
        };

        for (int iteration = 1; iteration <= cfg_.iterations; ++iteration) {
            std::vector<Predicate> candidates;
            ExpandStats es;
            double estimated = 0.0;
            if (iteration == 1) {
                candidates = expand(Predicate{}, data_.schema, prune_,
                                    cfg_.max_cross_size, dedupe_, &es);
                estimated = estimate_nonempty(candidates);
            } else {
                if (queue.empty()) break;
                // Pop base slices in priority order until the estimated
                // nonempty candidate count reaches the budget. A popped base
                // is always expanded in full, so the estimate may overshoot
                // the budget by one expansion.
                while (estimated < k_target && !queue.empty()) {
                    const QueueEntry entry = queue.top();
                    queue.pop();
                    auto fresh = expand(entry.predicate, data_.schema, prune_,
                                        cfg_.max_cross_size, dedupe_, &es);
                    for (const auto& c : fresh) estimated += rates_.lookup(c.cross_size());
                    std::move(fresh.begin(), fresh.end(), std::back_inserter(candidates));
                }
                if (candidates.empty()) continue;
            }
            Round round = evaluate_round(std::move(candidates), iteration, es, estimated);
            push_frontier(round.frontier);
        }
    }

    double priority_of(const SliceStat& stat) const {
        switch (cfg_.priority_score) {
            case PriorityScore::PValue:
                return stat.p;
            case PriorityScore::Random:
                return static_cast<double>(
                           mix64(cfg_.seed ^ 0x7e5c5e2b9d3f4a11ull ^ stat.predicate.hash()) >>
                           11) *
                       0x1.0p-53;
            case PriorityScore::BreadthFirst:
                return static_cast<double>(stat.predicate.cross_size());
        }
        return stat.p;
    }

    double estimate_nonempty(const std::vector<Predicate>& candidates) const {
        double estimated = 0;
        for (const auto& c : candidates) estimated += rates_.lookup(c.cross_size());
        return estimated;
    }

    const EncodedDataset& data_;
    const SearchConfig& cfg_;
    const ProgressFn& progress_;
    PruneIndex prune_;       // significant + too-small (+ empty) slices
    PredicateSet dedupe_;    // every candidate generated this run
    NonemptyRates rates_;
    std::vector<SliceStat> significant_;
    SearchOutcome out_;
};

}  // namespace

SearchOutcome run_search(const EncodedDataset& data, const SearchConfig& config,
                         const ProgressFn& progress) {
    validate(config);
    if (data.n_rows == 0) throw ConfigError("dataset is empty");
    Driver driver(data, config, progress);
    return driver.run();
}

SearchOutcome run_batch(const EncodedDataset& data, SearchConfig config,
                        const ProgressFn& progress) {
    config.strategy = Strategy::Batch;
    return run_search(data, config, progress);
}

SearchOutcome run_iterative(const EncodedDataset& data, SearchConfig config,
                            const ProgressFn& progress) {
    config.strategy = Strategy::Iterative;
    return run_search(data, config, progress);
}

SearchOutcome run_priority(const EncodedDataset& data, SearchConfig config,
                           const ProgressFn& progress) {
    config.strategy = Strategy::Priority;
    return run_search(data, config, progress);
}

}  // namespace slicescope
