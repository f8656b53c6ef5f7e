#include "cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>

#include "dune/kb.hpp"
#include "dune/render.hpp"
#include "dune/service.hpp"
#include "dune/session.hpp"

namespace dune::cli {
namespace {

struct Config {
    std::string kb_path;
    std::string inputs_path;
    std::string format = "paper";
    int port = 0;
    std::string kb_dir;
    std::string log_dir;
};

std::optional<std::filesystem::path> resolve_log_dir(const Config& config) {
    if (!config.log_dir.empty()) return config.log_dir;
    if (const char* env = std::getenv("DUNE_LOG_DIR"); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

// Loads the KB, printing errors (and warnings when `verbose`). Empty on failure.
std::optional<KnowledgeBase> load_kb(const std::string& path, std::ostream& err, bool verbose = false) {
    auto result = load_kb_file(path);
    for (const auto& d : result.diagnostics) {
        if (d.is_error() || verbose) err << format_diagnostic(d, path) << '\n';
    }
    return std::move(result.kb);
}

int cmd_replay(const Config& config, std::ostream& out, std::ostream& err) {
    auto kb = load_kb(config.kb_path, err);
    if (!kb) return kExitFailure;
    std::vector<FeatureId> features;
    try {
        features = read_feature_file(config.inputs_path);
    } catch (const std::exception& e) {
        err << config.inputs_path << ": " << e.what() << '\n';
        return kExitFailure;
    }
    Session session(std::move(*kb));
    if (auto dir = resolve_log_dir(config)) attach_log_dir(session, *dir);
    for (const auto& f : features) session.submit(f.str());
    out << render_replay(session, config.format);
    return kExitOk;
}

int cmd_interactive(const Config& config, std::istream& in, std::ostream& out, std::ostream& err) {
    auto kb = load_kb(config.kb_path, err);
    if (!kb) return kExitFailure;
    Session session(std::move(*kb));
    if (auto dir = resolve_log_dir(config)) attach_log_dir(session, *dir);

    for (;;) {
        out << kTableHeader << '\n' << render_rows(session.engine().snapshot());
        if (auto q = session.engine().best_question()) out << "ask about: " << q->feature.str() << "?\n";
        out << "> " << std::flush;

        std::string line;
        if (!std::getline(in, line)) break;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
        if (line == "done") break;
        if (!is_identifier(line)) {
            err << "malformed feature '" << line << "'\n";
            continue;
        }
        auto report = session.submit(line);
        for (const auto& e : report.events) {
            if (e.kind == EventKind::unknown_feature) err << "warning: unknown feature '" << e.subject << "'\n";
        }
    }

    out << '\n' << render_summary_matrix(session.matrix());
    for (const auto& report : session.log()) {
        for (const auto& e : report.events) {
            if (e.kind == EventKind::accept) out << render_accept(e);
        }
    }
    return kExitOk;
}

int cmd_validate(const Config& config, std::ostream& err) {
    return load_kb(config.kb_path, err, true) ? kExitOk : kExitFailure;
}

int cmd_serve(const Config& config, std::ostream& out, std::ostream& err) {
    Service service(resolve_log_dir(config));
    if (!config.kb_dir.empty()) {
        std::error_code ec;
        if (!std::filesystem::is_directory(config.kb_dir, ec)) {
            err << "kb directory '" << config.kb_dir << "' not found\n";
            return kExitFailure;
        }
        for (const auto& [name, reg] : service.register_kb_dir(config.kb_dir)) {
            for (const auto& d : reg.diagnostics) {
                if (d.is_error()) err << format_diagnostic(d, name) << '\n';
            }
            if (!reg.kb_id.empty()) out << "loaded " << name << " as kb " << reg.kb_id << '\n';
        }
    }

    // SIGINT/SIGTERM are taken by a waiter thread so the server can shut down cleanly.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigset_t previous;
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    if (service.bind("0.0.0.0", config.port) < 0) {
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        err << "cannot bind port " << config.port << '\n';
        return kExitFailure;
    }
    out << "listening on port " << config.port << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        service.stop();
    });
    service.run();
    // run() only returns after stop(); wake the waiter if something else stopped us.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Demon-based interpretation shell"};
    app.require_subcommand(1);
    Config config;

    auto* replay = app.add_subcommand("replay", "Replay a feature sequence and print the step tables");
    replay->add_option("--kb", config.kb_path, "Knowledge base (.dune)")->required();
    replay->add_option("--inputs", config.inputs_path, "Feature sequence, one per line")->required();
    replay->add_option("--format", config.format, "paper, tsv or jsonl")
        ->check(CLI::IsMember({"paper", "tsv", "jsonl"}));
    replay->add_option("--log-dir", config.log_dir, "Persist the session log here");

    auto* interactive = app.add_subcommand("interactive", "Enter features one at a time");
    interactive->add_option("--kb", config.kb_path, "Knowledge base (.dune)")->required();
    interactive->add_option("--log-dir", config.log_dir, "Persist the session log here");

    auto* validate = app.add_subcommand("validate", "Check a knowledge base");
    validate->add_option("--kb", config.kb_path, "Knowledge base (.dune)")->required();

    auto* serve = app.add_subcommand("serve", "Run the session service");
    serve->add_option("--port", config.port, "TCP port")->required()->check(CLI::Range(1, 65535));
    serve->add_option("--kb-dir", config.kb_dir, "Register every .dune file in this directory");
    serve->add_option("--log-dir", config.log_dir, "Persist session logs here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitFailure;
    }

    try {
        if (*replay) return cmd_replay(config, out, err);
        if (*interactive) return cmd_interactive(config, in, out, err);
        if (*validate) return cmd_validate(config, err);
        return cmd_serve(config, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace dune::cli
