#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dune/behavior.hpp"
#include "dune/diagnostics.hpp"
#include "dune/types.hpp"

namespace dune {

struct KbSource {
    std::string text;
    std::string origin = "<inline>";
};

struct ParseResult {
    // Set only when no ERROR diagnostic was produced.
    std::optional<KnowledgeBase> kb;
    std::vector<Diagnostic> diagnostics;

    bool ok() const noexcept { return kb.has_value(); }
};

// Parses the .dune knowledge-base language:
//
//   kb     := { demon }
//   demon  := "demon" IDENT "{" { clause } "}"
//   clause := "accept" INT | "reject" INT | "death" INT
//           | "behavior" IDENT | "output" STRING | "leaf" IDENT INT
//           | "group" IDENT "{" "members" "[" IDENT { "," IDENT } "]"
//                              [ "bonus" "[" INT { "," INT } "]" ] "}"
//
// '#' starts a comment running to end of line. Never throws on bad input.
ParseResult parse_kb(const KbSource& src);

// Semantic checks that need the whole demon: threshold ordering and behavior
// ids are errors; unreachable accept thresholds and zero-bonus groups warn.
std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb, const BehaviorRegistry& behaviors = {});

// Canonical text; parse_kb(serialize_kb(kb)) == kb.
std::string serialize_kb(const KnowledgeBase& kb);

// parse_kb + validate_kb on a file. A read failure is reported as a diagnostic.
ParseResult load_kb_file(const std::filesystem::path& path, const BehaviorRegistry& behaviors = {});

}  // namespace dune
