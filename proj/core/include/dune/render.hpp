#pragma once

#include <string>
#include <vector>

#include "dune/session.hpp"
#include "dune/types.hpp"

namespace dune {

inline constexpr const char* kTableHeader =
    "DEMON\tSTATE\tCONF\tOLD\tDEATH\tACCP\tREJCT\tFNUM\tREACT\tOR-BNS";

std::string render_rows(const std::vector<TraceRow>& rows);
// Header line followed by one row per demon.
std::string render_step_table(const StepReport& report);
// "inputN: <feature>", the table, then one line per accept event.
std::string render_paper_step(const StepReport& report);
std::string render_accept(const Event& event);
// Demon name followed by its confidence after each step.
std::string render_summary_matrix(const SummaryMatrix& matrix);

// Entire replay in the given layout: "paper", "tsv" or "jsonl".
std::string render_replay(const Session& session, std::string_view format);

}  // namespace dune
