#pragma once

// Trace CSV: iteration,x_km,y_km,value_raw,value_preprocessed,best_so_far,ess
// (1-based iteration; ess empty for random placements).

#include <iosfwd>
#include <string>

#include "hbo/acquisition.hpp"
#include "hbo/data.hpp"

namespace hbo {

void write_trace_csv(std::ostream& out, const BoTrace& trace);

/// Re-binds rows to candidate indices of `snapshot` by exact location match.
BoTrace read_trace_csv(std::istream& in, const Snapshot& snapshot, const std::string& source = "<stream>");

}  // namespace hbo
