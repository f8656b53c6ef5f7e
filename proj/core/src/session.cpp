#include "dune/session.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dune/diagnostics.hpp"
#include "report_json.hpp"

namespace dune {
namespace {

using detail::ordered_json;

std::string random_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream out;
    out << std::hex << std::setfill('0') << std::setw(16) << rng() << std::setw(16) << rng();
    return out.str();
}

std::string utc_now_iso8601() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string describe_mismatch(const StepReport& recorded, const StepReport& recomputed) {
    if (recorded.feature != recomputed.feature) return "feature differs";
    if (recorded.rows.size() != recomputed.rows.size()) return "row count differs";
    for (std::size_t i = 0; i < recorded.rows.size(); ++i) {
        if (recorded.rows[i] != recomputed.rows[i]) return "row for demon '" + recomputed.rows[i].demon + "' differs";
    }
    return "events differ";
}

}  // namespace

SummaryMatrix summarize(const std::vector<std::string>& demons, const std::vector<StepReport>& log) {
    SummaryMatrix m;
    m.demons = demons;
    m.cells.assign(demons.size(), {});
    for (const auto& report : log) {
        for (std::size_t d = 0; d < demons.size() && d < report.rows.size(); ++d) {
            m.cells[d].push_back(report.rows[d].conf);
        }
    }
    return m;
}

Session::Session(KnowledgeBase kb, BehaviorRegistry behaviors)
    : id_(random_session_id()), created_at_(utc_now_iso8601()), engine_(std::move(kb), std::move(behaviors)) {}

StepReport Session::submit(std::string_view feature) {
    auto report = engine_.apply_step(feature);
    log_.push_back(report);
    if (hook_) hook_(*this, log_.back());
    return report;
}

SummaryMatrix Session::matrix() const {
    std::vector<std::string> names;
    for (const auto& d : engine_.kb().demons) names.push_back(d.name);
    return summarize(names, log_);
}

ReplayResult replay(KnowledgeBase kb, const std::vector<FeatureId>& features, BehaviorRegistry behaviors) {
    Session session(std::move(kb), std::move(behaviors));
    for (const auto& f : features) session.submit(f.str());
    auto matrix = session.matrix();
    return {std::move(session), std::move(matrix)};
}

std::vector<FeatureId> parse_feature_sequence(std::string_view text) {
    std::vector<FeatureId> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        auto word = line.substr(first, last - first + 1);
        auto feature = FeatureId::parse(word);
        if (!feature) throw std::invalid_argument("line " + std::to_string(number) + ": malformed feature '" + word + "'");
        out.push_back(std::move(*feature));
    }
    return out;
}

std::vector<FeatureId> read_feature_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_feature_sequence(text.str());
}

std::string log_line(const StepReport& report) {
    return detail::to_json(report).dump();
}

StepReport parse_log_line(std::string_view line) {
    return detail::report_from_json(ordered_json::parse(line));
}

void persist_log(const Session& session, std::ostream& sink) {
    for (const auto& report : session.log()) sink << log_line(report) << '\n';
}

Session load_log(std::istream& source, KnowledgeBase kb, BehaviorRegistry behaviors) {
    Session session(std::move(kb), std::move(behaviors));
    std::string line;
    int step = 0;
    while (std::getline(source, line)) {
        if (line.empty()) continue;
        ++step;
        StepReport recorded;
        try {
            recorded = parse_log_line(line);
        } catch (const std::exception& e) {
            throw IntegrityError(step, std::string("unreadable line: ") + e.what());
        }
        if (recorded.fnum != step) {
            throw IntegrityError(step, "recorded fnum " + std::to_string(recorded.fnum));
        }
        auto recomputed = session.submit(recorded.feature.str());
        if (recomputed != recorded) throw IntegrityError(step, describe_mismatch(recorded, recomputed));
    }
    return session;
}

void attach_log_dir(Session& session, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto path = dir / (session.id() + ".jsonl");
    session.on_step([path](const Session&, const StepReport& report) {
        std::ofstream out(path, std::ios::app | std::ios::binary);
        out << log_line(report) << '\n';
    });
}

}  // namespace dune
