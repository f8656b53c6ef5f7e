#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dune {

// True for [a-z_][a-z0-9_]*.
bool is_identifier(std::string_view text) noexcept;

// An input item the demons react to, e.g. "fatigue".
class FeatureId {
public:
    // Throws std::invalid_argument unless `name` is an identifier.
    explicit FeatureId(std::string name);

    static std::optional<FeatureId> parse(std::string_view name);

    const std::string& str() const noexcept { return name_; }

    friend bool operator==(const FeatureId&, const FeatureId&) = default;
    friend auto operator<=>(const FeatureId&, const FeatureId&) = default;

private:
    std::string name_;
};

inline constexpr int kMinConfidence = -100;
inline constexpr int kMaxConfidence = 100;

inline constexpr int kDefaultAccept = 90;
inline constexpr int kDefaultReject = 0;
inline constexpr int kDefaultDeath = 0;

inline constexpr std::string_view kStandardBehavior = "standard-data-demon";

struct ThresholdSet {
    int death = kDefaultDeath;
    int reject = kDefaultReject;
    int accept = kDefaultAccept;

    // -100 <= death <= reject < accept <= 100
    bool well_ordered() const noexcept;

    friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

// Cumulative OR-bonus B(1..n). An empty schedule awards nothing; a schedule
// shorter than its group is padded with its last value.
struct BonusSchedule {
    std::vector<int> cumulative;

    // B(k), with B(0) = 0.
    int at(std::size_t satisfied) const noexcept;
    bool nondecreasing() const noexcept;

    friend bool operator==(const BonusSchedule&, const BonusSchedule&) = default;
};

struct CriterionGroup {
    std::string name;
    std::vector<FeatureId> members;
    BonusSchedule schedule;

    bool contains(const FeatureId& feature) const noexcept;
    int full_bonus() const noexcept { return schedule.at(members.size()); }

    friend bool operator==(const CriterionGroup&, const CriterionGroup&) = default;
};

struct DemonDef {
    std::string name;
    // Ordered by declaration; at most one entry per feature.
    std::vector<std::pair<FeatureId, int>> leaves;
    std::vector<CriterionGroup> groups;
    ThresholdSet thresholds;
    std::string behavior{kStandardBehavior};
    std::string output_text;

    // Leaf weight for `feature`, 0 when the demon has no such leaf.
    int leaf_weight(const FeatureId& feature) const noexcept;
    bool mentions(const FeatureId& feature) const noexcept;
    // Distinct features in leaves and groups, first-mention order.
    std::vector<FeatureId> features() const;
    // Confidence reached when every positive leaf and every group is satisfied.
    int max_attainable() const noexcept;

    friend bool operator==(const DemonDef&, const DemonDef&) = default;
};

struct SourceLoc {
    int line = 0;
    int column = 0;
};

struct KnowledgeBase {
    std::vector<DemonDef> demons;
    // Position of each demon's name token; empty for programmatically built KBs.
    std::map<std::string, SourceLoc, std::less<>> locations;

    const DemonDef* find(std::string_view name) const noexcept;

    // Structural equality; source positions do not participate.
    friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
        return a.demons == b.demons;
    }
};

// All leaf and member features across the KB.
std::vector<FeatureId> vocabulary(const KnowledgeBase& kb);

enum class Status { alive, accepted, rejected, dead };

std::string_view to_string(Status status) noexcept;
std::optional<Status> status_from_string(std::string_view text) noexcept;

struct GroupState {
    std::size_t satisfied_count = 0;
    int prev_or_bonus = 0;

    friend bool operator==(const GroupState&, const GroupState&) = default;
};

struct Reaction {
    int raw = 0;
    int or_bonus = 0;
    // Indexed like DemonDef::groups.
    std::vector<int> group_deltas;

    friend bool operator==(const Reaction&, const Reaction&) = default;
};

struct DemonState {
    Status status = Status::alive;
    int confidence = 0;
    int old_confidence = 0;
    std::vector<FeatureId> rcvd_features;
    int fnum = 0;
    std::vector<GroupState> group_states;
    bool accepted_latched = false;
    // Reaction from the demon's last processed step.
    int last_react = 0;
    int last_or_bonus = 0;

    bool received(const FeatureId& feature) const noexcept;

    friend bool operator==(const DemonState&, const DemonState&) = default;
};

// Confidence shown for a demon once it has died.
inline constexpr int kDeadSentinel = -1;

struct TraceRow {
    std::string demon;
    Status state = Status::alive;
    int conf = 0;
    int old = 0;
    int death = 0;
    int accp = 0;
    int rejct = 0;
    int fnum = 0;
    int react = 0;
    int or_bns = 0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

enum class EventKind { accept, death, reject, unknown_feature };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> event_kind_from_string(std::string_view text) noexcept;

struct Event {
    EventKind kind;
    // Demon name, or the feature for unknown_feature.
    std::string subject;
    // Output text for accept events.
    std::string text;

    friend bool operator==(const Event&, const Event&) = default;
};

struct StepReport {
    int fnum = 0;
    FeatureId feature{"unset"};
    std::vector<TraceRow> rows;
    std::vector<Event> events;

    friend bool operator==(const StepReport&, const StepReport&) = default;
};

// Read-only view of the engine taken before a step's updates.
struct Environment {
    int alive_count = 0;
    std::vector<std::pair<std::string, int>> confidences;
};

struct QuestionSuggestion {
    std::string demon;
    FeatureId feature;
    int potential = 0;

    friend bool operator==(const QuestionSuggestion&, const QuestionSuggestion&) = default;
};

enum class Reachability { accepted, possible, impossible };

std::string_view to_string(Reachability reach) noexcept;

}  // namespace dune

template <>
struct std::hash<dune::FeatureId> {
    std::size_t operator()(const dune::FeatureId& f) const noexcept {
        return std::hash<std::string>{}(f.str());
    }
};
