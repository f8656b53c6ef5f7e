#include "dune/types.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dune {

bool is_identifier(std::string_view text) noexcept {
    if (text.empty()) return false;
    auto head = text.front();
    if (!(head == '_' || (head >= 'a' && head <= 'z'))) return false;
    return std::all_of(text.begin() + 1, text.end(), [](char c) {
        return c == '_' || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
    });
}

FeatureId::FeatureId(std::string name) : name_(std::move(name)) {
    if (!is_identifier(name_)) {
        throw std::invalid_argument("malformed feature identifier '" + name_ + "'");
    }
}

std::optional<FeatureId> FeatureId::parse(std::string_view name) {
    if (!is_identifier(name)) return std::nullopt;
    return FeatureId(std::string(name));
}

bool ThresholdSet::well_ordered() const noexcept {
    return kMinConfidence <= death && death <= reject && reject < accept && accept <= kMaxConfidence;
}

int BonusSchedule::at(std::size_t satisfied) const noexcept {
    if (satisfied == 0 || cumulative.empty()) return 0;
    return cumulative[std::min(satisfied, cumulative.size()) - 1];
}

bool BonusSchedule::nondecreasing() const noexcept {
    return std::is_sorted(cumulative.begin(), cumulative.end());
}

bool CriterionGroup::contains(const FeatureId& feature) const noexcept {
    return std::find(members.begin(), members.end(), feature) != members.end();
}

int DemonDef::leaf_weight(const FeatureId& feature) const noexcept {
    for (const auto& [f, w] : leaves) {
        if (f == feature) return w;
    }
    return 0;
}

bool DemonDef::mentions(const FeatureId& feature) const noexcept {
    for (const auto& [f, w] : leaves) {
        if (f == feature) return true;
    }
    return std::any_of(groups.begin(), groups.end(),
                       [&](const CriterionGroup& g) { return g.contains(feature); });
}

std::vector<FeatureId> DemonDef::features() const {
    std::vector<FeatureId> out;
    auto add = [&](const FeatureId& f) {
        if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    };
    for (const auto& [f, w] : leaves) add(f);
    for (const auto& g : groups) {
        for (const auto& m : g.members) add(m);
    }
    return out;
}

int DemonDef::max_attainable() const noexcept {
    int total = 0;
    for (const auto& [f, w] : leaves) total += std::max(0, w);
    for (const auto& g : groups) total += g.full_bonus();
    return total;
}

const DemonDef* KnowledgeBase::find(std::string_view name) const noexcept {
    auto it = std::find_if(demons.begin(), demons.end(), [&](const DemonDef& d) { return d.name == name; });
    return it == demons.end() ? nullptr : &*it;
}

std::vector<FeatureId> vocabulary(const KnowledgeBase& kb) {
    std::set<FeatureId> seen;
    for (const auto& d : kb.demons) {
        for (const auto& f : d.features()) seen.insert(f);
    }
    return {seen.begin(), seen.end()};
}

bool DemonState::received(const FeatureId& feature) const noexcept {
    return std::find(rcvd_features.begin(), rcvd_features.end(), feature) != rcvd_features.end();
}

std::string_view to_string(Status status) noexcept {
    switch (status) {
        case Status::alive: return "ALIVE";
        case Status::accepted: return "ACCEPTED";
        case Status::rejected: return "REJECTED";
        case Status::dead: return "DEAD";
    }
    return "?";
}

std::optional<Status> status_from_string(std::string_view text) noexcept {
    for (auto s : {Status::alive, Status::accepted, Status::rejected, Status::dead}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::accept: return "ACCEPT";
        case EventKind::death: return "DEATH";
        case EventKind::reject: return "REJECT";
        case EventKind::unknown_feature: return "UNKNOWN_FEATURE";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) noexcept {
    for (auto k : {EventKind::accept, EventKind::death, EventKind::reject, EventKind::unknown_feature}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::string_view to_string(Reachability reach) noexcept {
    switch (reach) {
        case Reachability::accepted: return "ACCEPTED";
        case Reachability::possible: return "POSSIBLE";
        case Reachability::impossible: return "IMPOSSIBLE";
    }
    return "?";
}

}  // namespace dune
