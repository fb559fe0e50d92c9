#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mldes {

using EventId = std::uint32_t;
using StateId = std::uint32_t;

/// Sorted set of 0-based indices (components, plants or requirements).
using IndexSet = std::set<std::size_t>;

/// Error raised while building or validating a model. Carries the source
/// position when the model came from text (line/column are 1-based, 0 if
/// unknown).
class ModelError : public std::runtime_error {
public:
    ModelError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct Event {
    std::string name;
    bool controllable = true;
};

/// Global event catalogue. Controllability is a property of the event, so
/// every automaton referring to an EventId sees the same attribute.
class EventTable {
public:
    EventId add(std::string name, bool controllable);

    std::optional<EventId> find(std::string_view name) const;
    const Event& operator[](EventId id) const { return events_.at(id); }
    bool controllable(EventId id) const { return events_.at(id).controllable; }
    std::size_t size() const { return events_.size(); }

    auto begin() const { return events_.begin(); }
    auto end() const { return events_.end(); }

private:
    std::vector<Event> events_;
    std::map<std::string, EventId, std::less<>> index_;
};

struct Edge {
    EventId event;
    StateId target;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Deterministic finite automaton over global event ids.
///
/// An automaton without states denotes the empty language; synthesis uses it
/// for supervisors whose initial state was removed. Outgoing edges of a state
/// are kept sorted by event.
class Automaton {
public:
    Automaton() = default;
    explicit Automaton(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    void set_name(std::string name) { name_ = std::move(name); }

    StateId add_state(std::string name, bool marked = false);
    void set_initial(StateId s);
    void set_marked(StateId s, bool marked);

    /// Adds `e` to the alphabet without adding a transition.
    void add_event(EventId e);

    /// Adds `from --e--> to` and puts `e` in the alphabet. Throws ModelError
    /// when a different transition on `e` already leaves `from`.
    void add_transition(StateId from, EventId e, StateId to);

    bool empty() const { return state_names_.empty(); }
    std::size_t num_states() const { return state_names_.size(); }
    std::size_t num_transitions() const;
    StateId initial() const { return initial_; }
    bool is_marked(StateId s) const { return marked_.at(s); }
    const std::string& state_name(StateId s) const { return state_names_.at(s); }
    std::optional<StateId> find_state(std::string_view name) const;

    /// Sorted alphabet.
    const std::vector<EventId>& alphabet() const { return alphabet_; }
    bool in_alphabet(EventId e) const;

    std::span<const Edge> edges(StateId s) const { return edges_.at(s); }
    std::optional<StateId> step(StateId s, EventId e) const;

    /// True when every state is marked (the generated language is then
    /// also the marked language).
    bool all_marked() const;

private:
    std::string name_;
    std::vector<std::string> state_names_;
    std::vector<char> marked_;
    std::vector<std::vector<Edge>> edges_;
    std::vector<EventId> alphabet_;
    StateId initial_ = 0;
};

/// Boolean formula over "plant is in location" atoms.
class Predicate {
public:
    enum class Kind { constant, atom, negation, conjunction, disjunction };

    static Predicate constant(bool value);
    static Predicate atom(std::size_t plant, StateId location);
    static Predicate negation(Predicate operand);
    static Predicate conjunction(std::vector<Predicate> operands);
    static Predicate disjunction(std::vector<Predicate> operands);

    Kind kind() const { return kind_; }
    bool value() const { return value_; }
    std::size_t plant() const { return plant_; }
    StateId location() const { return location_; }
    const std::vector<Predicate>& operands() const { return operands_; }

    /// `location_of(plant)` returns the current location of a plant.
    template <typename LocationOf>
    bool evaluate(const LocationOf& location_of) const {
        switch (kind_) {
        case Kind::constant: return value_;
        case Kind::atom: return location_of(plant_) == location_;
        case Kind::negation: return !operands_.front().evaluate(location_of);
        case Kind::conjunction:
            for (const auto& op : operands_)
                if (!op.evaluate(location_of)) return false;
            return true;
        case Kind::disjunction:
            for (const auto& op : operands_)
                if (op.evaluate(location_of)) return true;
            return false;
        }
        return false;
    }

    /// Plants mentioned by some atom.
    void collect_plants(IndexSet& out) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;

private:
    Kind kind_ = Kind::constant;
    bool value_ = true;
    std::size_t plant_ = 0;
    StateId location_ = 0;
    std::vector<Predicate> operands_;
};

/// State-event invariant: `event` may only occur where `condition` holds.
struct Invariant {
    EventId event;
    Predicate condition;
};

struct Requirement {
    std::string name;
    std::variant<Automaton, Invariant> body;

    bool is_automaton() const { return std::holds_alternative<Automaton>(body); }
    const Automaton& automaton() const { return std::get<Automaton>(body); }
    const Invariant& invariant() const { return std::get<Invariant>(body); }

    /// Invariants are always prefix-closed; automata are when fully marked.
    bool prefix_closed() const;

    /// Events this requirement refers to.
    std::vector<EventId> events() const;
    /// Plants whose locations the requirement reads (invariants only).
    IndexSet location_plants() const;
};

/// Plants and requirements in declaration order. Plant i and requirement j
/// keep their index through the whole pipeline.
struct ModelSet {
    EventTable events;
    std::vector<Automaton> plants;
    std::vector<Requirement> requirements;

    std::optional<std::size_t> find_plant(std::string_view name) const;
    std::optional<std::size_t> find_requirement(std::string_view name) const;

    /// Indices of plants whose alphabet contains `e`.
    std::vector<std::size_t> owners(EventId e) const;

    /// Checks every cross-object invariant (unique names, ownership of
    /// requirement events, alphabet membership). Throws ModelError.
    void validate() const;
};

} // namespace mldes
