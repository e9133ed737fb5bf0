#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "slicescope/search.hpp"

namespace slicescope {

// One slice as a single-line JSON object. Floats carry 9 significant digits;
// undefined values serialize as null.
std::string record_to_json(const SliceStat& stat, const FeatureSchema& schema);

void write_records(std::ostream& out, std::span<const SliceStat> stats,
                   const FeatureSchema& schema);

// Human-readable totals: significant found, candidates evaluated, CPU time.
void write_summary(std::ostream& out, const SearchOutcome& outcome,
                   const SearchConfig& config, const FeatureSchema& schema);

std::string direction_name(Direction d);

}  // namespace slicescope
