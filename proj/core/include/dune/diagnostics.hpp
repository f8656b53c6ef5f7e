#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dune {

enum class Severity { error, warning };

std::string_view to_string(Severity severity) noexcept;

struct Diagnostic {
    Severity severity = Severity::error;
    int line = 0;
    int column = 0;
    std::string code;
    std::string message;

    bool is_error() const noexcept { return severity == Severity::error; }

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics) noexcept;

// "<origin>:<line>:<column>: error: <message> [<code>]"
std::string format_diagnostic(const Diagnostic& d, std::string_view origin);

// A knowledge base that cannot be loaded into an engine.
class KbError : public std::runtime_error {
public:
    explicit KbError(std::vector<Diagnostic> diagnostics);

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

// Behavior registration misuse (duplicate or reserved id).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A persisted session log that does not replay to the recorded rows.
class IntegrityError : public std::runtime_error {
public:
    IntegrityError(int step, const std::string& what);

    // 1-based step (log line) of the first divergence.
    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace dune
