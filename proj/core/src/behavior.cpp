#include "dune/behavior.hpp"

#include "dune/diagnostics.hpp"

namespace dune {

int standard_data_demon(const Reaction& reaction, const Environment&) {
    return reaction.raw + reaction.or_bonus;
}

BehaviorRegistry::BehaviorRegistry() {
    behaviors_.emplace(std::string(kStandardBehavior), &standard_data_demon);
}

void BehaviorRegistry::add(std::string id, Behavior behavior) {
    if (id == kStandardBehavior) {
        throw ConfigError("behavior '" + id + "' is built in and cannot be replaced");
    }
    if (!behavior) throw ConfigError("behavior '" + id + "' is empty");
    auto [it, inserted] = behaviors_.emplace(std::move(id), std::move(behavior));
    if (!inserted) throw ConfigError("behavior '" + it->first + "' is already registered");
}

bool BehaviorRegistry::contains(std::string_view id) const {
    return behaviors_.find(id) != behaviors_.end();
}

const Behavior& BehaviorRegistry::get(std::string_view id) const {
    auto it = behaviors_.find(id);
    if (it == behaviors_.end()) throw ConfigError("unregistered behavior '" + std::string(id) + "'");
    return it->second;
}

}  // namespace dune
