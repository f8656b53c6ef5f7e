#pragma once

#include <json.hpp>

#include "dune/types.hpp"

namespace dune::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const TraceRow& row);
ordered_json to_json(const Event& event);
ordered_json to_json(const StepReport& report);
ordered_json rows_to_json(const std::vector<TraceRow>& rows);

// Throws nlohmann::json exceptions or std::invalid_argument on malformed input.
StepReport report_from_json(const ordered_json& j);

}  // namespace dune::detail
