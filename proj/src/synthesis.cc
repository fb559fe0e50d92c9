#include "mldes/synthesis.hh"

#include <algorithm>
#include <atomic>
#include <deque>
#include <exception>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace mldes {

namespace {

struct TupleHash {
    std::size_t operator()(const std::vector<StateId>& v) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (StateId s : v) {
            h ^= s;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

/// Per-event bookkeeping for the explicit product of plants and
/// requirement automata.
struct EventPlan {
    EventId event;
    bool controllable;
    std::vector<std::size_t> owners;        // slots in the state tuple (plants and requirement automata)
    std::size_t plant_owner_count = 0;      // leading entries of `owners` that are plants
    std::vector<const Predicate*> guards;   // invariants on this event
};

class Product {
public:
    Product(const ModelSet& model, std::span<const std::size_t> plants, std::span<const std::size_t> requirements) {
        for (std::size_t p : plants) {
            slot_of_plant_.emplace(p, automata_.size());
            automata_.push_back(&model.plants.at(p));
        }
        plant_slots_ = automata_.size();
        std::vector<const Invariant*> invariants;
        for (std::size_t r : requirements) {
            const Requirement& req = model.requirements.at(r);
            if (req.is_automaton()) {
                automata_.push_back(&req.automaton());
            } else {
                invariants.push_back(&req.invariant());
                for (std::size_t p : req.location_plants())
                    if (!slot_of_plant_.contains(p))
                        throw std::invalid_argument("requirement '" + req.name + "' reads plant '" +
                                                    model.plants[p].name() + "' outside the synthesis problem");
            }
        }

        std::vector<EventId> alphabet;
        for (std::size_t i = 0; i < plant_slots_; ++i)
            alphabet.insert(alphabet.end(), automata_[i]->alphabet().begin(), automata_[i]->alphabet().end());
        std::sort(alphabet.begin(), alphabet.end());
        alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
        alphabet_ = alphabet;

        for (std::size_t i = plant_slots_; i < automata_.size(); ++i)
            for (EventId e : automata_[i]->alphabet())
                if (!std::binary_search(alphabet.begin(), alphabet.end(), e))
                    throw std::invalid_argument("requirement event '" + model.events[e].name +
                                                "' is not in any plant of the synthesis problem");
        for (const Invariant* inv : invariants)
            if (!std::binary_search(alphabet.begin(), alphabet.end(), inv->event))
                throw std::invalid_argument("invariant event '" + model.events[inv->event].name +
                                            "' is not in any plant of the synthesis problem");

        for (EventId e : alphabet) {
            EventPlan plan{e, model.events.controllable(e), {}, 0, {}};
            for (std::size_t i = 0; i < automata_.size(); ++i)
                if (automata_[i]->in_alphabet(e)) {
                    plan.owners.push_back(i);
                    if (i < plant_slots_) ++plan.plant_owner_count;
                }
            for (const Invariant* inv : invariants)
                if (inv->event == e) plan.guards.push_back(&inv->condition);
            plans_.push_back(std::move(plan));
        }
    }

    const std::vector<EventId>& alphabet() const { return alphabet_; }
    std::span<const Automaton* const> automata() const { return automata_; }

    /// Explores the reachable product. Transitions blocked only by the
    /// requirements are dropped; when such a transition is uncontrollable
    /// its source is flagged in `bad`.
    Automaton explore(std::vector<char>& bad, std::size_t budget) const {
        Automaton graph("supervisor");
        for (EventId e : alphabet_) graph.add_event(e);
        std::unordered_map<std::vector<StateId>, StateId, TupleHash> index;
        std::vector<std::vector<StateId>> tuples;
        auto intern = [&](std::vector<StateId> tuple) -> StateId {
            auto it = index.find(tuple);
            if (it != index.end()) return it->second;
            if (tuples.size() >= budget) throw StateBudgetError("synthesis", budget);
            bool marked = true;
            std::string name;
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                marked = marked && automata_[i]->is_marked(tuple[i]);
                if (i) name += '.';
                name += automata_[i]->state_name(tuple[i]);
            }
            StateId id = graph.add_state(std::move(name), marked);
            index.emplace(tuple, id);
            tuples.push_back(std::move(tuple));
            bad.push_back(0);
            return id;
        };

        std::vector<StateId> init;
        for (const Automaton* a : automata_) init.push_back(a->initial());
        graph.set_initial(intern(std::move(init)));

        for (StateId current = 0; current < tuples.size(); ++current) {
            for (const EventPlan& plan : plans_) {
                std::vector<StateId> next = tuples[current];
                bool plant_enabled = true;
                bool spec_enabled = true;
                for (std::size_t k = 0; k < plan.owners.size(); ++k) {
                    const std::size_t slot = plan.owners[k];
                    auto t = automata_[slot]->step(next[slot], plan.event);
                    if (!t) {
                        if (k < plan.plant_owner_count) plant_enabled = false;
                        else spec_enabled = false;
                        break;
                    }
                    next[slot] = *t;
                }
                if (!plant_enabled) continue;
                if (spec_enabled) {
                    const auto& source = tuples[current];
                    auto location_of = [&](std::size_t plant) { return source[slot_of_plant_.at(plant)]; };
                    for (const Predicate* guard : plan.guards)
                        if (!guard->evaluate(location_of)) {
                            spec_enabled = false;
                            break;
                        }
                }
                if (!spec_enabled) {
                    if (!plan.controllable) bad[current] = 1;
                    continue;
                }
                StateId target = intern(std::move(next));
                graph.add_transition(current, plan.event, target);
            }
        }
        return graph;
    }

private:
    std::vector<const Automaton*> automata_;
    std::size_t plant_slots_ = 0;
    std::unordered_map<std::size_t, std::size_t> slot_of_plant_;
    std::vector<EventId> alphabet_;
    std::vector<EventPlan> plans_;
};

/// Greatest fixpoint of "not bad, every uncontrollable successor good,
/// coreachable to a marked good state".
std::vector<char> supremal_good(const ModelSet& model, const Automaton& graph, const std::vector<char>& bad) {
    const std::size_t n = graph.num_states();
    std::vector<char> good(n);
    for (std::size_t s = 0; s < n; ++s) good[s] = !bad[s];

    std::vector<std::vector<std::pair<StateId, bool>>> preds(n);  // (source, uncontrollable)
    for (StateId s = 0; s < n; ++s)
        for (const auto& edge : graph.edges(s))
            preds[edge.target].emplace_back(s, !model.events.controllable(edge.event));

    for (;;) {
        // Controllability: propagate removal backwards along uncontrollable edges.
        std::vector<StateId> stack;
        for (StateId s = 0; s < n; ++s)
            if (!good[s]) stack.push_back(s);
        while (!stack.empty()) {
            StateId s = stack.back();
            stack.pop_back();
            for (auto [p, uncontrollable] : preds[s])
                if (uncontrollable && good[p]) {
                    good[p] = 0;
                    stack.push_back(p);
                }
        }
        // Nonblocking: keep good states that reach a marked good state.
        std::vector<char> coreach(n, 0);
        for (StateId s = 0; s < n; ++s)
            if (good[s] && graph.is_marked(s)) {
                coreach[s] = 1;
                stack.push_back(s);
            }
        while (!stack.empty()) {
            StateId s = stack.back();
            stack.pop_back();
            for (auto [p, uncontrollable] : preds[s])
                if (good[p] && !coreach[p]) {
                    coreach[p] = 1;
                    stack.push_back(p);
                }
        }
        bool changed = false;
        for (StateId s = 0; s < n; ++s)
            if (good[s] && !coreach[s]) {
                good[s] = 0;
                changed = true;
            }
        if (!changed) return good;
    }
}

} // namespace

Supervisor synthesize(const ModelSet& model, std::span<const std::size_t> plants,
                      std::span<const std::size_t> requirements, std::size_t state_budget) {
    if (plants.empty()) throw std::invalid_argument("synthesize: no plants");
    const Product product(model, plants, requirements);
    std::vector<char> bad;
    const Automaton graph = product.explore(bad, state_budget);
    const auto good = supremal_good(model, graph, bad);
    return Supervisor{restrict_states(graph, good)};
}

Supervisor synthesize_monolithic(const ModelSet& model, std::size_t state_budget) {
    std::vector<std::size_t> plants(model.plants.size());
    for (std::size_t i = 0; i < plants.size(); ++i) plants[i] = i;
    std::vector<std::size_t> requirements(model.requirements.size());
    for (std::size_t j = 0; j < requirements.size(); ++j) requirements[j] = j;
    return synthesize(model, plants, requirements, state_budget);
}

std::vector<std::size_t> plants_of(const ProductSystem& ps, const IndexSet& components) {
    std::vector<std::size_t> plants;
    for (std::size_t c : components) plants.insert(plants.end(), ps.groups.at(c).begin(), ps.groups.at(c).end());
    std::sort(plants.begin(), plants.end());
    return plants;
}

std::size_t TreeSynthesisResult::max_css() const {
    std::size_t m = 0;
    for (const auto& n : nodes) m = std::max(m, n.css());
    return m;
}

TreeSynthesisResult synthesize_tree(const SynthesisTree& tree, const ModelSet& model, const ProductSystem& ps,
                                    unsigned jobs, std::size_t state_budget) {
    TreeSynthesisResult result;
    std::vector<const SynthesisNode*> work;
    for (const SynthesisNode* node : tree.preorder()) {
        if (node->needs_synthesis()) work.push_back(node);
        else result.skipped.push_back(node->path);
    }
    result.nodes.resize(work.size());
    std::vector<std::exception_ptr> errors(work.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
            const SynthesisNode& node = *work[i];
            try {
                const auto plants = plants_of(ps, node.plants);
                const std::vector<std::size_t> reqs(node.requirements.begin(), node.requirements.end());
                NodeResult& out = result.nodes[i];
                out.path = node.path;
                out.components = node.plants;
                out.requirement_count = reqs.size();
                out.supervisor = synthesize(model, plants, reqs, state_budget);
                out.supervisor.automaton.set_name("S" + node.path);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& n : result.nodes) {
        result.total_css += n.css();
        if (n.supervisor.empty()) result.empty_nodes.push_back(n.path);
    }
    return result;
}

bool check_controllability(const ModelSet& model, const Automaton& plant, const Automaton& sup) {
    if (plant.empty() || sup.empty()) return true;
    std::unordered_set<std::uint64_t> seen;
    auto key = [](StateId p, StateId s) { return (static_cast<std::uint64_t>(p) << 32) | s; };
    std::deque<std::pair<StateId, StateId>> queue{{plant.initial(), sup.initial()}};
    seen.insert(key(plant.initial(), sup.initial()));
    auto visit = [&](StateId p, StateId s) {
        if (seen.insert(key(p, s)).second) queue.emplace_back(p, s);
    };
    while (!queue.empty()) {
        auto [p, s] = queue.front();
        queue.pop_front();
        for (const auto& edge : plant.edges(p)) {
            if (!sup.in_alphabet(edge.event)) {
                visit(edge.target, s);
                continue;
            }
            auto t = sup.step(s, edge.event);
            if (!t) {
                if (!model.events.controllable(edge.event)) return false;
                continue;
            }
            visit(edge.target, *t);
        }
        for (const auto& edge : sup.edges(s))
            if (!plant.in_alphabet(edge.event)) visit(p, edge.target);
    }
    return true;
}

bool check_nonblocking(const Automaton& a) {
    const auto reach = reachable_states(a);
    const auto coreach = coreachable_states(a);
    for (std::size_t s = 0; s < a.num_states(); ++s)
        if (reach[s] && !coreach[s]) return false;
    return true;
}

bool check_safety(const ModelSet& model, const Automaton& sup, std::span<const std::size_t> plants,
                  std::span<const std::size_t> requirements) {
    if (sup.empty()) return true;
    // Slot 0 is the supervisor, then plants, then requirement automata.
    std::vector<const Automaton*> automata{&sup};
    std::unordered_map<std::size_t, std::size_t> slot_of_plant;
    for (std::size_t p : plants) {
        slot_of_plant.emplace(p, automata.size());
        automata.push_back(&model.plants.at(p));
    }
    std::vector<const Invariant*> invariants;
    for (std::size_t r : requirements) {
        const Requirement& req = model.requirements.at(r);
        if (req.is_automaton()) automata.push_back(&req.automaton());
        else invariants.push_back(&req.invariant());
    }

    std::unordered_set<std::vector<StateId>, TupleHash> seen;
    std::deque<std::vector<StateId>> queue;
    std::vector<StateId> init;
    for (const Automaton* a : automata) init.push_back(a->initial());
    seen.insert(init);
    queue.push_back(std::move(init));
    while (!queue.empty()) {
        std::vector<StateId> current = std::move(queue.front());
        queue.pop_front();
        auto location_of = [&](std::size_t plant) { return current[slot_of_plant.at(plant)]; };
        for (const auto& edge : sup.edges(current[0])) {
            for (const Invariant* inv : invariants)
                if (inv->event == edge.event && !inv->condition.evaluate(location_of)) return false;
            std::vector<StateId> next = current;
            next[0] = edge.target;
            for (std::size_t i = 1; i < automata.size(); ++i) {
                if (!automata[i]->in_alphabet(edge.event)) continue;
                auto t = automata[i]->step(current[i], edge.event);
                if (!t) return false;
                next[i] = *t;
            }
            if (seen.insert(next).second) queue.push_back(std::move(next));
        }
    }
    return true;
}

EquivalenceReport global_equivalence(const TreeSynthesisResult& result, const ModelSet& model,
                                     std::size_t state_budget) {
    EquivalenceReport report;
    report.prefix_closed = std::all_of(model.requirements.begin(), model.requirements.end(),
                                       [](const Requirement& r) { return r.prefix_closed(); });
    report.nonblocking_guaranteed =
        report.prefix_closed &&
        std::all_of(model.plants.begin(), model.plants.end(), [](const Automaton& p) { return p.all_marked(); });

    std::vector<const Automaton*> parts;
    for (const auto& node : result.nodes) parts.push_back(&node.supervisor.automaton);
    for (const auto& plant : model.plants) parts.push_back(&plant);
    const Automaton composed = sync_compose(std::span<const Automaton* const>(parts), state_budget);
    const Supervisor monolithic = synthesize_monolithic(model, state_budget);
    report.composed_states = composed.num_states();
    report.monolithic_states = monolithic.css();
    report.equivalent = language_equivalent(composed, monolithic.automaton);
    return report;
}

} // namespace mldes
