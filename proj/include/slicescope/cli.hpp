#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slicescope {

struct RunConfig {
    std::string data_path;
    std::string label_column = "label";
    std::string predictions_path;
    std::string baseline_predictions_path;  // empty: compare slice vs overall
    std::vector<std::string> categorical_columns;

    std::string metric_name = "accuracy";
    double threshold = 0.5;
    int auc_buckets = 128;

    std::string strategy = "iterative";
    int max_cross_size = 3;
    uint64_t min_slice_size = 1;
    double alpha = 0.01;
    int replicates = 20;
    uint64_t top_j = 100;
    uint64_t num_bins = 10;
    double k_per_iter = 0;    // 0: default to 12% of the batch search space
    int iterations = 5;
    std::string direction = "lower";
    uint64_t seed = 0;
    int workers = 1;

    std::string output = "-";   // "-" = stdout
    bool verbose = false;
    bool progress = false;
};

// Parses flags (and an optional --config file; flags win). Throws ConfigError
// with a message naming the offending field.
RunConfig parse_run_config(const std::vector<std::string>& args);

// Ingest -> search -> report. Returns the process exit status.
int run_slicing(const RunConfig& config);

// Full CLI entry point used by the binary.
int run_main(int argc, char** argv);

}  // namespace slicescope
