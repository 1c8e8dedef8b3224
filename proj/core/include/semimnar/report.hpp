#pragma once

#include <string>

#include "semimnar/inference.hpp"
#include "semimnar/simulation.hpp"

namespace semimnar {

/// Aligned text table, one line per (estimator, target). MSE and bias of
/// mean estimators are scaled by `mu_scale` (1000 gives the usual x10^-3 layout).
std::string format_table(const SimulationReport& r, double mu_scale = 1000.0);

/// One JSON object per (estimator, target) summary row, newline separated.
std::string to_json_lines(const SimulationReport& r);

/// One JSON object per replication record, newline separated.
std::string records_to_json_lines(const SimulationReport& r);

std::string to_json(const EstimateReport& r);

}  // namespace semimnar
