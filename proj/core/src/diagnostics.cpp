#include "dune/diagnostics.hpp"

#include <algorithm>

namespace dune {

std::string_view to_string(Severity severity) noexcept {
    return severity == Severity::error ? "error" : "warning";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) noexcept {
    return std::any_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.is_error(); });
}

std::string format_diagnostic(const Diagnostic& d, std::string_view origin) {
    std::string out(origin);
    out += ':' + std::to_string(d.line) + ':' + std::to_string(d.column) + ": ";
    out += to_string(d.severity);
    out += ": " + d.message + " [" + d.code + "]";
    return out;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
    for (const auto& d : diagnostics) {
        if (d.is_error()) return "invalid knowledge base: " + format_diagnostic(d, "kb");
    }
    return "invalid knowledge base";
}

}  // namespace

KbError::KbError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

IntegrityError::IntegrityError(int step, const std::string& what)
    : std::runtime_error("session log diverges at step " + std::to_string(step) + ": " + what), step_(step) {}

}  // namespace dune
