#pragma once

#include <string>
#include <vector>

#include "slicescope/schema.hpp"

namespace slicescope {

struct LoadOptions {
    std::string label_column = "label";
    // Columns forced categorical even when every value parses as a number.
    std::vector<std::string> categorical_columns;
    char delimiter = ',';
};

// Delimited text with a header row. Column types are taken from
// categorical_columns or inferred: all non-missing cells numeric-parseable
// -> numeric, else categorical. Empty cells are missing.
RawDataset load_dataset_csv(const std::string& path, const LoadOptions& opts);

// Delimited text with columns `row_index, score`; row_index must run
// 0..N-1 in file order. A header line is skipped when present.
PredictionSet load_predictions_csv(const std::string& path, size_t expected_rows);

}  // namespace slicescope
