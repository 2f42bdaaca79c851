#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "estimand_lab/decomposition.hpp"
#include "estimand_lab/montecarlo.hpp"
#include "estimand_lab/projection.hpp"

namespace estimand_lab {

// Deterministic shortest-round-trip-adjacent formatting: %.17g everywhere,
// so identical doubles always print identical bytes.
std::string format_double(double x);

nlohmann::json report_to_json(const DecompositionReport& report, const ActionSpace& space);
nlohmann::json sat_reports_to_json(const std::vector<DecompositionReport>& reports,
                                   const ActionSpace& space);
nlohmann::json projection_to_json(const ProjectionResult& result);
nlohmann::json sim_report_to_json(const SimReport& report);

// One row per atom: coordinates, weights, contrast lines, contributions.
std::string report_to_csv(const DecompositionReport& report, const ActionSpace& space);
std::string sat_reports_to_csv(const std::vector<DecompositionReport>& reports,
                               const ActionSpace& space);
std::string sim_report_to_csv(const SimReport& report);

}  // namespace estimand_lab
