#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mldes/compose.hh"
#include "mldes/model.hh"
#include "mldes/product.hh"
#include "mldes/transform.hh"

namespace mldes {

inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

struct Supervisor {
    Automaton automaton;  // the supervised behavior; empty when synthesis removed the initial state
    std::size_t css() const { return automaton.num_states(); }
    bool empty() const { return automaton.empty(); }
};

/// Maximally permissive, controllable, nonblocking supervisor for the
/// given raw plants under the given requirements.
Supervisor synthesize(const ModelSet& model, std::span<const std::size_t> plants,
                      std::span<const std::size_t> requirements, std::size_t state_budget = kDefaultStateBudget);

/// Whole model: every plant, every requirement.
Supervisor synthesize_monolithic(const ModelSet& model, std::size_t state_budget = kDefaultStateBudget);

/// Raw plant indices of a set of product-system components.
std::vector<std::size_t> plants_of(const ProductSystem& ps, const IndexSet& components);

struct NodeResult {
    std::string path;
    IndexSet components;
    std::size_t requirement_count = 0;
    Supervisor supervisor;
    std::size_t css() const { return supervisor.css(); }
};

struct TreeSynthesisResult {
    std::vector<NodeResult> nodes;      // synthesized nodes, preorder
    std::vector<std::string> skipped;   // paths of nodes without requirements
    std::vector<std::string> empty_nodes;  // paths whose supervisor is empty
    std::size_t total_css = 0;

    std::size_t max_css() const;
};

/// Synthesizes every node that owns requirements, `jobs` nodes at a time.
TreeSynthesisResult synthesize_tree(const SynthesisTree& tree, const ModelSet& model, const ProductSystem& ps,
                                    unsigned jobs = 1, std::size_t state_budget = kDefaultStateBudget);

/// No reachable state of plant || sup disables an uncontrollable event the
/// plant enables.
bool check_controllability(const ModelSet& model, const Automaton& plant, const Automaton& sup);

/// Every reachable state can reach a marked state.
bool check_nonblocking(const Automaton& a);

/// Every event `sup` executes is allowed by the plants and by each listed
/// requirement (automata are tracked alongside, invariants are evaluated
/// at the plants' current locations).
bool check_safety(const ModelSet& model, const Automaton& sup, std::span<const std::size_t> plants,
                  std::span<const std::size_t> requirements);

struct EquivalenceReport {
    bool equivalent = false;
    bool prefix_closed = false;           // every requirement is prefix-closed
    bool nonblocking_guaranteed = false;  // prefix-closed requirements over fully marked plants
    std::size_t monolithic_states = 0;
    std::size_t composed_states = 0;
};

/// Composes every node supervisor with all plants and compares the result
/// with the monolithic supervisor. Throws StateBudgetError when either
/// side outgrows `state_budget`.
EquivalenceReport global_equivalence(const TreeSynthesisResult& result, const ModelSet& model,
                                     std::size_t state_budget = kDefaultStateBudget);

} // namespace mldes
