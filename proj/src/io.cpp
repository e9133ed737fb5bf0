#include "slicescope/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace slicescope {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

}  // namespace

RawDataset load_dataset_csv(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IngestError("dataset file is empty: " + path);
    const auto header = split_line(strip_cr(line), opts.delimiter);

    size_t label_idx = header.size();
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == opts.label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw IngestError("label column '" + opts.label_column + "' not found in " + path);
    }
    for (const auto& name : opts.categorical_columns) {
        if (std::find(header.begin(), header.end(), name) == header.end()) {
            throw IngestError("declared categorical column '" + name + "' not found in " + path);
        }
    }
    const std::unordered_set<std::string> declared(opts.categorical_columns.begin(),
                                                   opts.categorical_columns.end());

    RawDataset ds;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i == label_idx) continue;
        RawColumn col;
        col.name = header[i];
        ds.features.push_back(std::move(col));
    }

    size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        auto cells = split_line(line, opts.delimiter);
        if (cells.size() != header.size()) {
            throw IngestError("row " + std::to_string(row) + ": expected " +
                              std::to_string(header.size()) + " columns, got " +
                              std::to_string(cells.size()));
        }
        double lv;
        if (!parse_double(cells[label_idx], lv) || (lv != 0.0 && lv != 1.0)) {
            throw IngestError("row " + std::to_string(row) + ": label must be 0 or 1, got '" +
                              cells[label_idx] + "'");
        }
        ds.labels.push_back(static_cast<uint8_t>(lv));
        size_t f = 0;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) continue;
            ds.features[f++].raw.push_back(std::move(cells[i]));
        }
        ++row;
    }
    if (row == 0) throw IngestError("dataset has no data rows: " + path);
    ds.n_rows = row;

    // Column typing: declared categorical wins; otherwise numeric iff every
    // non-missing cell parses as a number.
    for (auto& col : ds.features) {
        if (declared.contains(col.name)) {
            col.kind = FeatureKind::Categorical;
            continue;
        }
        bool numeric = true;
        bool any_value = false;
        double v;
        for (const auto& cell : col.raw) {
            if (cell.empty()) continue;
            any_value = true;
            if (!parse_double(cell, v)) {
                numeric = false;
                break;
            }
        }
        col.kind = (numeric && any_value) ? FeatureKind::Numeric : FeatureKind::Categorical;
        if (col.kind == FeatureKind::Numeric) {
            col.numeric.resize(col.raw.size(), std::numeric_limits<double>::quiet_NaN());
            for (size_t r = 0; r < col.raw.size(); ++r) {
                if (!col.raw[r].empty()) parse_double(col.raw[r], col.numeric[r]);
            }
        }
    }
    return ds;
}

PredictionSet load_predictions_csv(const std::string& path, size_t expected_rows) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open predictions file: " + path);

    PredictionSet out;
    out.model_id = std::filesystem::path(path).stem().string();
    out.scores.reserve(expected_rows);

    std::string line;
    size_t row = 0;
    bool first = true;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() && in.peek() == EOF) break;
        auto cells = split_line(line, ',');
        if (first) {
            first = false;
            double probe;
            if (!cells.empty() && !parse_double(cells[0], probe)) continue;  // header
        }
        if (cells.size() != 2) {
            throw IngestError(path + " line " + std::to_string(row) +
                              ": expected `row_index, score`");
        }
        double idx, score;
        if (!parse_double(cells[0], idx) || idx != static_cast<double>(row)) {
            throw IngestError(path + ": row_index must run 0.." +
                              std::to_string(expected_rows - 1) + " in order; got '" +
                              cells[0] + "' at position " + std::to_string(row));
        }
        if (!parse_double(cells[1], score) || !std::isfinite(score) || score < 0.0 ||
            score > 1.0) {
            throw IngestError(path + " row " + std::to_string(row) +
                              ": score must be a finite value in [0,1]");
        }
        out.scores.push_back(score);
        ++row;
    }
    if (out.scores.size() != expected_rows) {
        throw IngestError(path + ": expected " + std::to_string(expected_rows) +
                          " predictions, got " + std::to_string(out.scores.size()));
    }
    return out;
}

}  // namespace slicescope
