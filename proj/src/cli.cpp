#include "slicescope/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "slicescope/common.hpp"
#include "slicescope/io.hpp"
#include "slicescope/report.hpp"
#include "slicescope/search.hpp"

namespace slicescope {

namespace {

std::unique_ptr<CLI::App> build_app(RunConfig& cfg) {
    auto app = std::make_unique<CLI::App>(
        "Finds data slices where a model's metric differs significantly from the "
        "overall dataset or from a baseline model.");
    app->set_config("--config", "", "Read options from a config file");

    app->add_option("--data", cfg.data_path, "Dataset file (delimited, header row)")
        ->required();
    app->add_option("--label-column", cfg.label_column, "Name of the binary label column");
    app->add_option("--predictions", cfg.predictions_path,
                    "Predictions file for the tested model (`row_index, score`)")
        ->required();
    app->add_option("--baseline-predictions", cfg.baseline_predictions_path,
                    "Predictions file for a baseline model; switches to slice-vs-slice "
                    "comparison");
    app->add_option("--categorical-columns", cfg.categorical_columns,
                    "Columns treated as categorical even when numeric-parseable")
        ->delimiter(',');

    app->add_option("--metric", cfg.metric_name,
                    "accuracy|precision|recall|f1|auc|log_loss")
        ->check(CLI::IsMember({"accuracy", "precision", "recall", "f1", "auc", "log_loss"}));
    app->add_option("--threshold", cfg.threshold, "Decision threshold for thresholded metrics")
        ->check(CLI::Range(0.0, 1.0).description("(0,1)"));
    app->add_option("--auc-buckets", cfg.auc_buckets, "Score bucket count for AUC")
        ->check(CLI::Range(2, 1 << 20));

    app->add_option("--strategy", cfg.strategy, "batch|iterative|priority")
        ->check(CLI::IsMember({"batch", "iterative", "priority"}));
    app->add_option("--max-cross-size", cfg.max_cross_size,
                    "Largest number of conjoined predicates")
        ->check(CLI::Range(1, 64));
    app->add_option("--min-slice-size", cfg.min_slice_size, "Smallest reportable slice");
    app->add_option("--alpha", cfg.alpha, "Significance threshold on p-values")
        ->check(CLI::Range(0.0, 1.0).description("(0,1)"));
    app->add_option("--replicates", cfg.replicates, "Bootstrap replicate count")
        ->check(CLI::Range(1, 100000));
    app->add_option("--top-j", cfg.top_j, "Retained values per categorical feature");
    app->add_option("--num-bins", cfg.num_bins, "Quantile bins per numeric feature");
    app->add_option("--k-per-iter", cfg.k_per_iter,
                    "Priority strategy: target nonempty candidates per iteration "
                    "(default: 12% of the batch search space)")
        ->check(CLI::Range(1.0, 1e18));
    app->add_option("--iterations", cfg.iterations, "Priority strategy: iteration count")
        ->check(CLI::Range(1, 1 << 30));
    app->add_option("--direction", cfg.direction, "Slice direction to report")
        ->check(CLI::IsMember({"lower", "higher", "any"}));
    app->add_option("--seed", cfg.seed, "Bootstrap seed");
    app->add_option("--workers", cfg.workers, "Parallel evaluation workers")
        ->check(CLI::Range(1, 4096));

    app->add_option("--output", cfg.output, "Report path for one JSON record per line ('-' "
                    "= stdout)");
    app->add_flag("--verbose", cfg.verbose,
                  "Report every evaluated nonempty slice, not just maximal significant ones");
    app->add_flag("--progress", cfg.progress, "Per-iteration progress on stderr");
    return app;
}

void check_ranges(const RunConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw ConfigError("--alpha must lie strictly inside (0,1)");
    }
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
        throw ConfigError("--threshold must lie strictly inside (0,1)");
    }
    if (cfg.top_j < 1) throw ConfigError("--top-j must be >= 1");
    if (cfg.num_bins < 1) throw ConfigError("--num-bins must be >= 1");
    if (cfg.min_slice_size < 1) throw ConfigError("--min-slice-size must be >= 1");
}

SearchConfig to_search_config(const RunConfig& cfg) {
    SearchConfig sc;
    if (cfg.strategy == "batch") {
        sc.strategy = Strategy::Batch;
    } else if (cfg.strategy == "iterative") {
        sc.strategy = Strategy::Iterative;
    } else {
        sc.strategy = Strategy::Priority;
    }
    sc.max_cross_size = static_cast<size_t>(cfg.max_cross_size);
    sc.min_slice_size = cfg.min_slice_size;
    sc.alpha = cfg.alpha;
    sc.replicates = cfg.replicates;
    sc.seed = cfg.seed;
    sc.mode = cfg.baseline_predictions_path.empty() ? DiffMode::VsOverall
                                                    : DiffMode::VsBaseline;
    const auto kind = metric_kind_from_name(cfg.metric_name);
    if (!kind) throw ConfigError("--metric: unknown metric '" + cfg.metric_name + "'");
    sc.metric = {*kind, cfg.threshold, cfg.auc_buckets};
    sc.wanted = cfg.direction == "lower"    ? DirectionFilter::Lower
                : cfg.direction == "higher" ? DirectionFilter::Higher
                                            : DirectionFilter::Any;
    sc.workers = cfg.workers;
    if (cfg.k_per_iter > 0) sc.k_per_iteration = cfg.k_per_iter;
    sc.iterations = cfg.iterations;
    sc.keep_all = cfg.verbose;
    return sc;
}

}  // namespace

RunConfig parse_run_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    auto app = build_app(cfg);
    std::vector<const char*> argv;
    argv.push_back("slicescope");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app->parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    check_ranges(cfg);
    return cfg;
}

int run_slicing(const RunConfig& cfg) {
    check_ranges(cfg);
    SearchConfig search_cfg = to_search_config(cfg);

    LoadOptions load_opts;
    load_opts.label_column = cfg.label_column;
    load_opts.categorical_columns = cfg.categorical_columns;
    RawDataset raw = load_dataset_csv(cfg.data_path, load_opts);

    std::vector<PredictionSet> predictions;
    predictions.push_back(load_predictions_csv(cfg.predictions_path, raw.n_rows));
    if (!cfg.baseline_predictions_path.empty()) {
        predictions.push_back(load_predictions_csv(cfg.baseline_predictions_path, raw.n_rows));
    }

    const FeatureSchema schema = infer_schema(raw, cfg.top_j, cfg.num_bins);
    const EncodedDataset data = encode(raw, predictions, schema);

    ProgressFn progress;
    if (cfg.progress) {
        progress = [](const IterationStats& it) {
            std::cerr << "iteration=" << it.iteration << " generated=" << it.generated
                      << " nonempty=" << it.nonempty << " significant=" << it.significant
                      << " pruned=" << it.pruned
                      << " estimated_nonempty=" << format_g9(it.estimated_nonempty) << "\n";
        };
    }

    const SearchOutcome outcome = run_search(data, search_cfg, progress);
    const std::span<const SliceStat> records =
        cfg.verbose ? std::span<const SliceStat>{outcome.evaluated}
                    : std::span<const SliceStat>{outcome.significant};

    if (cfg.output == "-") {
        write_records(std::cout, records, schema);
        write_summary(std::cerr, outcome, search_cfg, schema);
    } else {
        std::ofstream out(cfg.output);
        if (!out) {
            std::cerr << "error: cannot open output file: " << cfg.output << "\n";
            return 1;
        }
        write_records(out, records, schema);
        if (!out.good()) {
            std::cerr << "error: failed writing report to " << cfg.output << "\n";
            return 1;
        }
        write_summary(std::cout, outcome, search_cfg, schema);
    }
    return 0;
}

int run_main(int argc, char** argv) {
    RunConfig cfg;
    auto app = build_app(cfg);
    try {
        app->parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app->exit(e);
    }
    try {
        return run_slicing(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace slicescope
