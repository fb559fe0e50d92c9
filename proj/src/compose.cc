#include "mldes/compose.hh"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <unordered_map>

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

std::string tuple_name(std::span<const Automaton* const> automata, const std::vector<StateId>& tuple) {
    std::string name;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) name += '.';
        name += automata[i]->state_name(tuple[i]);
    }
    return name;
}

} // namespace

StateBudgetError::StateBudgetError(const std::string& where, std::size_t budget)
    : std::runtime_error(where + ": state budget of " + std::to_string(budget) + " exceeded"), budget_(budget) {}

Automaton sync_compose(std::span<const Automaton* const> automata, std::size_t max_states) {
    if (automata.empty()) throw std::invalid_argument("sync_compose: empty automaton list");

    std::string name;
    for (const auto* a : automata) {
        if (!name.empty()) name += "||";
        name += a->name();
    }
    Automaton result(name);

    std::vector<EventId> alphabet;
    for (const auto* a : automata) alphabet.insert(alphabet.end(), a->alphabet().begin(), a->alphabet().end());
    std::sort(alphabet.begin(), alphabet.end());
    alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
    for (EventId e : alphabet) result.add_event(e);

    for (const auto* a : automata)
        if (a->empty()) return Automaton(name);

    std::vector<std::vector<std::size_t>> owners(alphabet.size());
    for (std::size_t k = 0; k < alphabet.size(); ++k)
        for (std::size_t i = 0; i < automata.size(); ++i)
            if (automata[i]->in_alphabet(alphabet[k])) owners[k].push_back(i);

    std::unordered_map<std::vector<StateId>, StateId, TupleHash> index;
    std::vector<std::vector<StateId>> tuples;
    auto intern = [&](std::vector<StateId> tuple) -> StateId {
        auto it = index.find(tuple);
        if (it != index.end()) return it->second;
        if (tuples.size() >= max_states) throw StateBudgetError("composition", max_states);
        bool marked = true;
        for (std::size_t i = 0; i < tuple.size(); ++i) marked = marked && automata[i]->is_marked(tuple[i]);
        StateId id = result.add_state(tuple_name(automata, tuple), marked);
        index.emplace(tuple, id);
        tuples.push_back(std::move(tuple));
        return id;
    };

    std::vector<StateId> init;
    for (const auto* a : automata) init.push_back(a->initial());
    result.set_initial(intern(std::move(init)));

    for (StateId current = 0; current < tuples.size(); ++current) {
        for (std::size_t k = 0; k < alphabet.size(); ++k) {
            std::vector<StateId> next = tuples[current];
            bool enabled = true;
            for (std::size_t i : owners[k]) {
                auto t = automata[i]->step(next[i], alphabet[k]);
                if (!t) {
                    enabled = false;
                    break;
                }
                next[i] = *t;
            }
            if (!enabled) continue;
            StateId target = intern(std::move(next));
            result.add_transition(current, alphabet[k], target);
        }
    }
    return result;
}

Automaton sync_compose(std::span<const Automaton> automata, std::size_t max_states) {
    std::vector<const Automaton*> ptrs;
    for (const auto& a : automata) ptrs.push_back(&a);
    return sync_compose(std::span<const Automaton* const>(ptrs), max_states);
}

bool language_equivalent(const Automaton& a, const Automaton& b) {
    if (a.empty() || b.empty()) return a.empty() && b.empty();
    std::unordered_map<std::uint64_t, bool> seen;
    auto key = [](StateId x, StateId y) { return (static_cast<std::uint64_t>(x) << 32) | y; };
    std::deque<std::pair<StateId, StateId>> queue{{a.initial(), b.initial()}};
    seen.emplace(key(a.initial(), b.initial()), true);
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        if (a.is_marked(x) != b.is_marked(y)) return false;
        auto ex = a.edges(x);
        auto ey = b.edges(y);
        if (ex.size() != ey.size()) return false;
        for (std::size_t i = 0; i < ex.size(); ++i) {
            if (ex[i].event != ey[i].event) return false;
            if (seen.emplace(key(ex[i].target, ey[i].target), true).second)
                queue.emplace_back(ex[i].target, ey[i].target);
        }
    }
    return true;
}

std::vector<char> reachable_states(const Automaton& a) {
    std::vector<char> seen(a.num_states(), 0);
    if (a.empty()) return seen;
    std::vector<StateId> stack{a.initial()};
    seen[a.initial()] = 1;
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (const auto& edge : a.edges(s))
            if (!seen[edge.target]) {
                seen[edge.target] = 1;
                stack.push_back(edge.target);
            }
    }
    return seen;
}

std::vector<char> coreachable_states(const Automaton& a) {
    std::vector<std::vector<StateId>> preds(a.num_states());
    for (StateId s = 0; s < a.num_states(); ++s)
        for (const auto& edge : a.edges(s)) preds[edge.target].push_back(s);
    std::vector<char> seen(a.num_states(), 0);
    std::vector<StateId> stack;
    for (StateId s = 0; s < a.num_states(); ++s)
        if (a.is_marked(s)) {
            seen[s] = 1;
            stack.push_back(s);
        }
    while (!stack.empty()) {
        StateId s = stack.back();
        stack.pop_back();
        for (StateId p : preds[s])
            if (!seen[p]) {
                seen[p] = 1;
                stack.push_back(p);
            }
    }
    return seen;
}

Automaton restrict_states(const Automaton& a, const std::vector<char>& keep) {
    Automaton result(a.name());
    for (EventId e : a.alphabet()) result.add_event(e);
    if (a.empty() || !keep.at(a.initial())) return result;
    std::vector<StateId> renumber(a.num_states(), UINT32_MAX);
    std::vector<StateId> order{a.initial()};
    renumber[a.initial()] = result.add_state(a.state_name(a.initial()), a.is_marked(a.initial()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& edge : a.edges(order[i])) {
            if (!keep[edge.target] || renumber[edge.target] != UINT32_MAX) continue;
            renumber[edge.target] = result.add_state(a.state_name(edge.target), a.is_marked(edge.target));
            order.push_back(edge.target);
        }
    }
    result.set_initial(0);
    for (StateId s : order)
        for (const auto& edge : a.edges(s))
            if (keep[edge.target]) result.add_transition(renumber[s], edge.event, renumber[edge.target]);
    return result;
}

Automaton reachable_part(const Automaton& a) {
    return restrict_states(a, std::vector<char>(a.num_states(), 1));
}

} // namespace mldes
