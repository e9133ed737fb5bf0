#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slicescope {

// Encoded feature value meaning "no value"; matches no singleton predicate.
inline constexpr int32_t kMissingValue = -1;

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Formats with 9 significant digits (%.9g). Used for report floats and bin
// labels so that rendered predicates round-trip exactly.
std::string format_g9(double v);

}  // namespace slicescope
