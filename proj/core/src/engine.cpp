#include "dune/engine.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "dune/diagnostics.hpp"
#include "dune/kb.hpp"

namespace dune {

Reaction raw_reaction(const DemonDef& def, const DemonState& state, const FeatureId& feature) {
    Reaction reaction;
    reaction.group_deltas.assign(def.groups.size(), 0);
    if (state.received(feature)) return reaction;

    reaction.raw = def.leaf_weight(feature);
    for (std::size_t g = 0; g < def.groups.size(); ++g) {
        const auto& group = def.groups[g];
        if (!group.contains(feature)) continue;
        auto k = state.group_states[g].satisfied_count;
        auto delta = group.schedule.at(k + 1) - state.group_states[g].prev_or_bonus;
        reaction.group_deltas[g] = delta;
        reaction.or_bonus += delta;
    }
    return reaction;
}

int potential_remaining(const DemonDef& def, const DemonState& state) {
    if (state.status == Status::dead) return 0;
    int total = 0;
    for (const auto& [feature, weight] : def.leaves) {
        if (!state.received(feature)) total += std::max(0, weight);
    }
    for (std::size_t g = 0; g < def.groups.size(); ++g) {
        total += def.groups[g].full_bonus() - state.group_states[g].prev_or_bonus;
    }
    return total;
}

int marginal_potential(const DemonDef& def, const DemonState& state, const FeatureId& feature) {
    if (state.received(feature)) return 0;
    auto reaction = raw_reaction(def, state, feature);
    return std::max(0, reaction.raw) + reaction.or_bonus;
}

Reachability reachability(const DemonDef& def, const DemonState& state) {
    if (state.accepted_latched) return Reachability::accepted;
    if (state.status == Status::dead) return Reachability::impossible;
    if (state.confidence + potential_remaining(def, state) < def.thresholds.accept) {
        return Reachability::impossible;
    }
    return Reachability::possible;
}

int displayed_confidence(const DemonState& state) noexcept {
    return state.status == Status::dead ? kDeadSentinel : state.confidence;
}

Engine::Engine(KnowledgeBase kb, BehaviorRegistry behaviors) : kb_(std::move(kb)) {
    auto diagnostics = validate_kb(kb_, behaviors);
    if (has_errors(diagnostics)) throw KbError(std::move(diagnostics));

    states_.reserve(kb_.demons.size());
    for (const auto& def : kb_.demons) {
        DemonState state;
        state.group_states.resize(def.groups.size());
        states_.push_back(std::move(state));
        demon_behaviors_.push_back(behaviors.get(def.behavior));
    }
    for (auto& f : vocabulary(kb_)) vocabulary_.insert(std::move(f));
}

StepReport Engine::apply_step(std::string_view feature) {
    auto parsed = FeatureId::parse(feature);
    if (!parsed) throw std::invalid_argument("malformed feature identifier '" + std::string(feature) + "'");
    return apply_step(*parsed);
}

StepReport Engine::apply_step(const FeatureId& feature) {
    const Environment env = environment();
    ++step_;

    StepReport report{step_, feature, {}, {}};
    if (!knows(feature)) report.events.push_back({EventKind::unknown_feature, feature.str(), {}});

    // All reactions read the pre-step states; nothing is written until every
    // demon has reacted.
    std::vector<std::optional<Reaction>> reactions(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i].status != Status::dead) reactions[i] = raw_reaction(kb_.demons[i], states_[i], feature);
    }

    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (!reactions[i]) continue;
        const auto& def = kb_.demons[i];
        const auto& reaction = *reactions[i];
        auto& s = states_[i];

        const int delta = demon_behaviors_[i](reaction, env);
        const int next = std::clamp(s.confidence + delta, kMinConfidence, kMaxConfidence);
        if (next != s.confidence) {
            s.old_confidence = s.confidence;
            s.confidence = next;
        }
        if (!s.received(feature)) {
            s.rcvd_features.push_back(feature);
            for (std::size_t g = 0; g < def.groups.size(); ++g) {
                if (!def.groups[g].contains(feature)) continue;
                auto& gs = s.group_states[g];
                ++gs.satisfied_count;
                gs.prev_or_bonus = def.groups[g].schedule.at(gs.satisfied_count);
            }
        }
        s.fnum = step_;
        s.last_react = reaction.raw;
        s.last_or_bonus = reaction.or_bonus;

        const auto& t = def.thresholds;
        const auto before = s.status;
        if (s.confidence < t.death) {
            s.status = Status::dead;
            report.events.push_back({EventKind::death, def.name, {}});
        } else if (s.accepted_latched) {
            s.status = Status::accepted;
        } else if (s.confidence >= t.accept) {
            s.status = Status::accepted;
            s.accepted_latched = true;
            report.events.push_back({EventKind::accept, def.name, def.output_text});
        } else if (s.confidence < t.reject) {
            s.status = Status::rejected;
            if (before != Status::rejected) report.events.push_back({EventKind::reject, def.name, {}});
        } else {
            s.status = Status::alive;
        }
    }

    report.rows = snapshot();
    return report;
}

TraceRow Engine::row_for(std::size_t index) const {
    const auto& def = kb_.demons[index];
    const auto& s = states_[index];
    const bool fresh = s.fnum == step_ && step_ > 0;
    return TraceRow{
        .demon = def.name,
        .state = s.status,
        .conf = displayed_confidence(s),
        .old = s.old_confidence,
        .death = def.thresholds.death,
        .accp = def.thresholds.accept,
        .rejct = def.thresholds.reject,
        .fnum = s.fnum,
        .react = fresh ? s.last_react : 0,
        .or_bns = fresh ? s.last_or_bonus : 0,
    };
}

std::vector<TraceRow> Engine::snapshot() const {
    std::vector<TraceRow> rows;
    rows.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i) rows.push_back(row_for(i));
    return rows;
}

Environment Engine::environment() const {
    Environment env;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i].status != Status::dead) ++env.alive_count;
        env.confidences.emplace_back(kb_.demons[i].name, displayed_confidence(states_[i]));
    }
    return env;
}

std::optional<QuestionSuggestion> Engine::best_question() const {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i].status != Status::dead && !states_[i].accepted_latched) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (states_[a].confidence != states_[b].confidence) return states_[a].confidence > states_[b].confidence;
        return kb_.demons[a].name < kb_.demons[b].name;
    });

    for (auto i : order) {
        const auto& def = kb_.demons[i];
        std::optional<QuestionSuggestion> best;
        for (const auto& feature : def.features()) {
            int pot = marginal_potential(def, states_[i], feature);
            if (pot <= 0) continue;
            if (!best || pot > best->potential || (pot == best->potential && feature < best->feature)) {
                best = QuestionSuggestion{def.name, feature, pot};
            }
        }
        if (best) return best;
    }
    return std::nullopt;
}

std::size_t Engine::index_of(std::string_view demon) const {
    for (std::size_t i = 0; i < kb_.demons.size(); ++i) {
        if (kb_.demons[i].name == demon) return i;
    }
    throw std::out_of_range("no demon named '" + std::string(demon) + "'");
}

const DemonState& Engine::state(std::string_view demon) const {
    return states_[index_of(demon)];
}

Reachability Engine::reachability(std::string_view demon) const {
    auto i = index_of(demon);
    return dune::reachability(kb_.demons[i], states_[i]);
}

int Engine::potential_remaining(std::string_view demon) const {
    auto i = index_of(demon);
    return dune::potential_remaining(kb_.demons[i], states_[i]);
}

}  // namespace dune
