#pragma once

#include <string>
#include <vector>

#include "mldes/model.hh"

namespace mldes {

/// Finest grouping of plants such that distinct groups share no event.
/// Group g is "component g" for every later stage.
struct ProductSystem {
    std::vector<std::vector<std::size_t>> groups;  // plant indices, ascending
    std::vector<std::vector<EventId>> alphabets;   // per group, sorted

    std::size_t size() const { return groups.size(); }

    /// Group containing `plant`.
    std::size_t group_of(std::size_t plant) const;

    /// Plant name for singleton groups, otherwise member names joined by '+'.
    std::string component_name(const ModelSet& model, std::size_t group) const;
};

/// Connected components of the "shares an event" relation, ordered by
/// smallest member plant.
ProductSystem refine(const std::vector<Automaton>& plants);

/// JSON document listing each component with its member plants.
std::string product_system_json(const ProductSystem& ps, const ModelSet& model);

} // namespace mldes
