#pragma once

#include "core/activations.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace driftlens::report {

// Grid heatmap of a fold-mean metric matrix. Rows are train domains, columns
// test domains. `inverted` flips the color ramp so that similarity metrics
// (high = good) render comparably to difference metrics (high = bad).
void write_heatmap_svg(const Matrix& values,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels,
                       const std::string& title, bool inverted,
                       std::ostream& out);

}  // namespace driftlens::report
