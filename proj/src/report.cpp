#include "slicescope/report.hpp"

#include <ostream>

#include <json.hpp>

#include "slicescope/common.hpp"
#include "slicescope/predicate.hpp"

namespace slicescope {

std::string direction_name(Direction d) {
    switch (d) {
        case Direction::Lower: return "LOWER";
        case Direction::Higher: return "HIGHER";
        case Direction::None: return "NONE";
    }
    return "NONE";
}

namespace {

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string opt_g9(const std::optional<double>& v) {
    return v ? format_g9(*v) : "null";
}

}  // namespace

std::string record_to_json(const SliceStat& stat, const FeatureSchema& schema) {
    std::string out = "{";
    out += "\"predicate\":" + json_string(render_predicate(stat.predicate, schema));
    out += ",\"cross_size\":" + std::to_string(stat.predicate.cross_size());
    out += ",\"size\":" + std::to_string(stat.size);
    out += ",\"slice_metric\":" + opt_g9(stat.slice_metric);
    out += ",\"ref_metric\":" + opt_g9(stat.ref_metric);
    out += ",\"delta\":" + opt_g9(stat.point_delta);
    out += ",\"mean_delta\":" + format_g9(stat.mean);
    out += ",\"sd\":" + format_g9(stat.sd);
    out += ",\"t\":" + opt_g9(stat.t);
    out += ",\"p\":" + format_g9(stat.p);
    out += ",\"usable_replicates\":" + std::to_string(stat.usable_replicates);
    out += ",\"dropped_replicates\":" + std::to_string(stat.dropped_replicates);
    out += ",\"direction\":" + json_string(direction_name(stat.direction));
    out += std::string(",\"significant\":") + (stat.significant ? "true" : "false");
    out += std::string(",\"testable\":") + (stat.testable ? "true" : "false");
    out += ",\"iteration\":" + std::to_string(stat.iteration);
    out += "}";
    return out;
}

void write_records(std::ostream& out, std::span<const SliceStat> stats,
                   const FeatureSchema& schema) {
    for (const auto& stat : stats) {
        out << record_to_json(stat, schema) << "\n";
    }
}

void write_summary(std::ostream& out, const SearchOutcome& outcome,
                   const SearchConfig& config, const FeatureSchema& schema) {
    const char* strategy = config.strategy == Strategy::Batch      ? "batch"
                           : config.strategy == Strategy::Iterative ? "iterative"
                                                                    : "priority";
    out << "strategy:              " << strategy << "\n";
    out << "metric:                " << metric_kind_name(config.metric.kind) << "\n";
    out << "overall "
        << (config.mode == DiffMode::VsBaseline ? "(model vs baseline): " : "metric:        ")
        << opt_g9(outcome.overall.slice_metric);
    if (config.mode == DiffMode::VsBaseline) {
        out << " vs " << opt_g9(outcome.overall.ref_metric);
    }
    out << "\n";
    out << "iterations:            " << outcome.iterations.size() << "\n";
    out << "candidates evaluated:  " << outcome.candidates_evaluated << "\n";
    uint64_t nonempty = 0;
    for (const auto& it : outcome.iterations) nonempty += it.nonempty;
    out << "nonempty slices:       " << nonempty << "\n";
    out << "significant found:     " << outcome.significant.size() << "\n";
    if (config.strategy == Strategy::Priority) {
        out << "candidates/iteration:  " << format_g9(outcome.resolved_k) << "\n";
    }
    out << "evaluator cpu seconds: " << format_g9(outcome.evaluator_cpu_seconds) << "\n";
    out << "wall seconds:          " << format_g9(outcome.wall_seconds) << "\n";
    if (!outcome.significant.empty()) {
        out << "top slices:\n";
        const size_t show = std::min<size_t>(outcome.significant.size(), 5);
        for (size_t i = 0; i < show; ++i) {
            const auto& s = outcome.significant[i];
            out << "  " << render_predicate(s.predicate, schema) << "  size=" << s.size
                << " delta=" << opt_g9(s.point_delta) << " p=" << format_g9(s.p) << "\n";
        }
    }
}

}  // namespace slicescope
