#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "dune/types.hpp"

namespace dune {

// Turns a demon's raw reaction into the confidence delta actually applied.
using Behavior = std::function<int(const Reaction&, const Environment&)>;

// Identity modifier used by standard data demons.
int standard_data_demon(const Reaction& reaction, const Environment& env);

class BehaviorRegistry {
public:
    // Holds only the built-in standard-data-demon.
    BehaviorRegistry();

    // Throws ConfigError when `id` is already registered.
    void add(std::string id, Behavior behavior);

    bool contains(std::string_view id) const;
    const Behavior& get(std::string_view id) const;

private:
    std::map<std::string, Behavior, std::less<>> behaviors_;
};

}  // namespace dune
