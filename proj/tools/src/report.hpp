#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "formulab/metrics.hpp"

namespace formulab::cli {

// Aligned plain-text table: one row per model, accuracy (%) / RMSE / MAE per
// split, plus a placeholder row for the SVM baseline that is not implemented.
void write_results_table(std::ostream& out, const std::vector<metrics::EvaluationReport>& reports);

// Predicted vs experimental scatter. OFDF-like plots add dashed lines at
// +/- 10 s around the identity line.
void write_scatter_svg(std::ostream& out, const metrics::SplitMetrics& split, TaskKind task,
                       const std::string& title);

}  // namespace formulab::cli
