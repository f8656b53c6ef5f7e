#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dune/diagnostics.hpp"

namespace dune {

struct KbRegistration {
    // Empty when the text has errors.
    std::string kb_id;
    std::vector<Diagnostic> diagnostics;
};

// Content address of a knowledge base text (truncated SHA-256, hex).
std::string kb_content_id(std::string_view text);

// JSON session service:
//
//   POST /kb                        .dune text -> {kb_id} | 422 diagnostics
//   POST /sessions                  {kb_id} -> 201 {session_id}
//   POST /sessions/{id}/features    {feature} -> step report
//   GET  /sessions/{id}             session view
//   GET  /sessions/{id}/trace       every step report so far
//   GET  /sessions/{id}/question    suggested question or null
//   GET  /healthz                   "ok"
//
// Steps within one session are serialized; sessions are independent.
class Service {
public:
    explicit Service(std::optional<std::filesystem::path> log_dir = std::nullopt);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    KbRegistration register_kb(std::string_view text);
    // Registers every *.dune file in `dir`; returns (file name, registration) pairs.
    std::vector<std::pair<std::string, KbRegistration>> register_kb_dir(const std::filesystem::path& dir);

    // Binds to `port`, or to any free port when `port` is 0. Returns the bound
    // port, or -1 when binding failed.
    int bind(const std::string& host, int port);
    // Blocks until stop() is called.
    void run();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dune
