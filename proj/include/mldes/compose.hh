#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mldes/model.hh"

namespace mldes {

/// Explicit exploration exceeded its state budget.
class StateBudgetError : public std::runtime_error {
public:
    StateBudgetError(const std::string& where, std::size_t budget);
    std::size_t budget() const { return budget_; }

private:
    std::size_t budget_;
};

/// Synchronous product. Shared events fire only when every owner enables
/// them; a composed state is marked iff all components are. States are
/// numbered in breadth-first discovery order from the initial tuple, with
/// events explored in id order, so the result is reproducible. Only reachable
/// states are generated. Throws std::invalid_argument on an empty list and
/// StateBudgetError when more than `max_states` states are discovered.
Automaton sync_compose(std::span<const Automaton* const> automata, std::size_t max_states = SIZE_MAX);
Automaton sync_compose(std::span<const Automaton> automata, std::size_t max_states = SIZE_MAX);

/// True iff both generate the same language and mark the same language.
bool language_equivalent(const Automaton& a, const Automaton& b);

std::vector<char> reachable_states(const Automaton& a);
std::vector<char> coreachable_states(const Automaton& a);

/// Keeps the states flagged in `keep` that are reachable from the initial
/// state through kept states. Renumbers in breadth-first order. Returns the
/// empty automaton when the initial state is not kept.
Automaton restrict_states(const Automaton& a, const std::vector<char>& keep);

/// Reachable part of `a`.
Automaton reachable_part(const Automaton& a);

} // namespace mldes
