#pragma once

#include <optional>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dune/behavior.hpp"
#include "dune/types.hpp"

namespace dune {

// Reaction of a live demon to `feature`; does not touch `state`.
// A feature the demon already received yields an empty reaction.
Reaction raw_reaction(const DemonDef& def, const DemonState& state, const FeatureId& feature);

// Sum of positive unreceived leaf weights plus every group's outstanding bonus.
int potential_remaining(const DemonDef& def, const DemonState& state);

// Confidence gained by receiving `feature` next, ignoring negative leaves.
int marginal_potential(const DemonDef& def, const DemonState& state, const FeatureId& feature);

Reachability reachability(const DemonDef& def, const DemonState& state);

// Confidence as displayed: -1 for dead demons.
int displayed_confidence(const DemonState& state) noexcept;

// Runs every demon of a knowledge base over a stream of features.
//
// Each step takes one environment snapshot before any demon is updated, so
// the demons of a step never observe each other's new confidences. Not
// thread-safe; callers serialize steps (see Session).
class Engine {
public:
    // Throws KbError when the KB fails validation against `behaviors`.
    explicit Engine(KnowledgeBase kb, BehaviorRegistry behaviors = {});

    // Throws std::invalid_argument for a malformed identifier.
    StepReport apply_step(std::string_view feature);
    StepReport apply_step(const FeatureId& feature);

    // Rows reflecting the most recent step, KB declaration order.
    std::vector<TraceRow> snapshot() const;

    std::optional<QuestionSuggestion> best_question() const;

    Environment environment() const;

    const KnowledgeBase& kb() const noexcept { return kb_; }
    const std::vector<DemonState>& states() const noexcept { return states_; }
    const DemonState& state(std::string_view demon) const;
    int step() const noexcept { return step_; }
    bool knows(const FeatureId& feature) const { return vocabulary_.contains(feature); }

    Reachability reachability(std::string_view demon) const;
    int potential_remaining(std::string_view demon) const;

private:
    std::size_t index_of(std::string_view demon) const;
    TraceRow row_for(std::size_t index) const;

    KnowledgeBase kb_;
    std::vector<Behavior> demon_behaviors_;
    std::unordered_set<FeatureId> vocabulary_;
    std::vector<DemonState> states_;
    int step_ = 0;
};

}  // namespace dune
