#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dune/engine.hpp"
#include "dune/types.hpp"

namespace dune {

// Confidence of each demon after each step; -1 once a demon is dead.
struct SummaryMatrix {
    std::vector<std::string> demons;
    // cells[d][j]: demon d after step j + 1.
    std::vector<std::vector<int>> cells;

    std::size_t steps() const noexcept { return cells.empty() ? 0 : cells.front().size(); }

    friend bool operator==(const SummaryMatrix&, const SummaryMatrix&) = default;
};

SummaryMatrix summarize(const std::vector<std::string>& demons, const std::vector<StepReport>& log);

// An engine plus the append-only log of every step it has taken.
class Session {
public:
    using StepHook = std::function<void(const Session&, const StepReport&)>;

    // Throws KbError for an invalid KB.
    explicit Session(KnowledgeBase kb, BehaviorRegistry behaviors = {});

    const std::string& id() const noexcept { return id_; }
    const std::string& created_at() const noexcept { return created_at_; }
    const Engine& engine() const noexcept { return engine_; }
    const std::vector<StepReport>& log() const noexcept { return log_; }

    // Called after each step is appended, e.g. to persist it.
    void on_step(StepHook hook) { hook_ = std::move(hook); }

    StepReport submit(std::string_view feature);

    SummaryMatrix matrix() const;

private:
    std::string id_;
    std::string created_at_;
    Engine engine_;
    std::vector<StepReport> log_;
    StepHook hook_;
};

struct ReplayResult {
    Session session;
    SummaryMatrix matrix;
};

ReplayResult replay(KnowledgeBase kb, const std::vector<FeatureId>& features, BehaviorRegistry behaviors = {});

// One identifier per line; '#' comments and blank lines are skipped.
// Throws std::invalid_argument naming the line of a malformed feature.
std::vector<FeatureId> parse_feature_sequence(std::string_view text);
// Throws std::runtime_error when the file cannot be read.
std::vector<FeatureId> read_feature_file(const std::filesystem::path& path);

// Session log: one JSON object per line, LF-terminated.
std::string log_line(const StepReport& report);
StepReport parse_log_line(std::string_view line);
void persist_log(const Session& session, std::ostream& sink);
// Replays the recorded features into a fresh session over `kb` and checks
// every recomputed step against the recorded one. Throws IntegrityError.
Session load_log(std::istream& source, KnowledgeBase kb, BehaviorRegistry behaviors = {});

// Appends each new step of `session` to <dir>/<session id>.jsonl.
void attach_log_dir(Session& session, const std::filesystem::path& dir);

}  // namespace dune
