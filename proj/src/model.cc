#include "mldes/model.hh"

#include <algorithm>
#include <sstream>

namespace mldes {

namespace {

std::string with_position(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    std::ostringstream os;
    os << line << ':' << column << ": " << what;
    return os.str();
}

} // namespace

ModelError::ModelError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error(with_position(what, line, column)), line_(line), column_(column) {}

EventId EventTable::add(std::string name, bool controllable) {
    if (index_.contains(name)) throw ModelError("duplicate event '" + name + "'");
    const auto id = static_cast<EventId>(events_.size());
    index_.emplace(name, id);
    events_.push_back(Event{std::move(name), controllable});
    return id;
}

std::optional<EventId> EventTable::find(std::string_view name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

StateId Automaton::add_state(std::string name, bool marked) {
    const auto id = static_cast<StateId>(state_names_.size());
    state_names_.push_back(std::move(name));
    marked_.push_back(marked ? 1 : 0);
    edges_.emplace_back();
    return id;
}

void Automaton::set_initial(StateId s) {
    if (s >= num_states()) throw ModelError("initial state out of range in '" + name_ + "'");
    initial_ = s;
}

void Automaton::set_marked(StateId s, bool marked) { marked_.at(s) = marked ? 1 : 0; }

void Automaton::add_event(EventId e) {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), e);
    if (it == alphabet_.end() || *it != e) alphabet_.insert(it, e);
}

void Automaton::add_transition(StateId from, EventId e, StateId to) {
    if (from >= num_states() || to >= num_states())
        throw ModelError("transition state out of range in '" + name_ + "'");
    auto& out = edges_[from];
    auto it = std::lower_bound(out.begin(), out.end(), e,
                               [](const Edge& edge, EventId ev) { return edge.event < ev; });
    if (it != out.end() && it->event == e) {
        if (it->target == to) return;
        throw ModelError("nondeterministic automaton '" + name_ + "': state '" +
                         state_names_[from] + "' has two transitions on the same event");
    }
    out.insert(it, Edge{e, to});
    add_event(e);
}

std::size_t Automaton::num_transitions() const {
    std::size_t n = 0;
    for (const auto& out : edges_) n += out.size();
    return n;
}

std::optional<StateId> Automaton::find_state(std::string_view name) const {
    for (StateId s = 0; s < state_names_.size(); ++s)
        if (state_names_[s] == name) return s;
    return std::nullopt;
}

bool Automaton::in_alphabet(EventId e) const {
    return std::binary_search(alphabet_.begin(), alphabet_.end(), e);
}

std::optional<StateId> Automaton::step(StateId s, EventId e) const {
    const auto& out = edges_[s];
    auto it = std::lower_bound(out.begin(), out.end(), e,
                               [](const Edge& edge, EventId ev) { return edge.event < ev; });
    if (it == out.end() || it->event != e) return std::nullopt;
    return it->target;
}

bool Automaton::all_marked() const {
    return std::all_of(marked_.begin(), marked_.end(), [](char m) { return m != 0; });
}

Predicate Predicate::constant(bool value) {
    Predicate p;
    p.kind_ = Kind::constant;
    p.value_ = value;
    return p;
}

Predicate Predicate::atom(std::size_t plant, StateId location) {
    Predicate p;
    p.kind_ = Kind::atom;
    p.plant_ = plant;
    p.location_ = location;
    return p;
}

Predicate Predicate::negation(Predicate operand) {
    Predicate p;
    p.kind_ = Kind::negation;
    p.operands_.push_back(std::move(operand));
    return p;
}

namespace {

// Nested operators of the same kind are flattened so that printing and
// re-parsing a formula gives the same tree.
std::vector<Predicate> flatten(std::vector<Predicate> operands, Predicate::Kind kind) {
    std::vector<Predicate> flat;
    for (auto& op : operands) {
        if (op.kind() == kind) {
            for (const auto& inner : op.operands()) flat.push_back(inner);
        } else {
            flat.push_back(std::move(op));
        }
    }
    return flat;
}

} // namespace

Predicate Predicate::conjunction(std::vector<Predicate> operands) {
    operands = flatten(std::move(operands), Kind::conjunction);
    if (operands.empty()) return constant(true);
    if (operands.size() == 1) return std::move(operands.front());
    Predicate p;
    p.kind_ = Kind::conjunction;
    p.operands_ = std::move(operands);
    return p;
}

Predicate Predicate::disjunction(std::vector<Predicate> operands) {
    operands = flatten(std::move(operands), Kind::disjunction);
    if (operands.empty()) return constant(false);
    if (operands.size() == 1) return std::move(operands.front());
    Predicate p;
    p.kind_ = Kind::disjunction;
    p.operands_ = std::move(operands);
    return p;
}

void Predicate::collect_plants(IndexSet& out) const {
    if (kind_ == Kind::atom) out.insert(plant_);
    for (const auto& op : operands_) op.collect_plants(out);
}

bool Requirement::prefix_closed() const {
    return is_automaton() ? automaton().all_marked() : true;
}

std::vector<EventId> Requirement::events() const {
    if (is_automaton()) return automaton().alphabet();
    return {invariant().event};
}

IndexSet Requirement::location_plants() const {
    IndexSet out;
    if (!is_automaton()) invariant().condition.collect_plants(out);
    return out;
}

std::optional<std::size_t> ModelSet::find_plant(std::string_view name) const {
    for (std::size_t i = 0; i < plants.size(); ++i)
        if (plants[i].name() == name) return i;
    return std::nullopt;
}

std::optional<std::size_t> ModelSet::find_requirement(std::string_view name) const {
    for (std::size_t j = 0; j < requirements.size(); ++j)
        if (requirements[j].name == name) return j;
    return std::nullopt;
}

std::vector<std::size_t> ModelSet::owners(EventId e) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < plants.size(); ++i)
        if (plants[i].in_alphabet(e)) out.push_back(i);
    return out;
}

namespace {

void validate_atoms(const Predicate& p, const ModelSet& model, const std::string& owner) {
    if (p.kind() == Predicate::Kind::atom) {
        if (p.plant() >= model.plants.size() || p.location() >= model.plants[p.plant()].num_states())
            throw ModelError("unknown location atom in requirement '" + owner + "'");
    }
    for (const auto& op : p.operands()) validate_atoms(op, model, owner);
}

void validate_automaton(const Automaton& a, const EventTable& events) {
    if (a.empty()) throw ModelError("automaton '" + a.name() + "' has no locations");
    std::set<std::string_view> names;
    for (StateId s = 0; s < a.num_states(); ++s) {
        if (!names.insert(a.state_name(s)).second)
            throw ModelError("duplicate location '" + a.state_name(s) + "' in '" + a.name() + "'");
        for (const auto& edge : a.edges(s)) {
            if (edge.event >= events.size())
                throw ModelError("unknown event id in '" + a.name() + "'");
            if (!a.in_alphabet(edge.event))
                throw ModelError("transition event outside alphabet in '" + a.name() + "'");
        }
    }
}

} // namespace

void ModelSet::validate() const {
    std::set<std::string_view> names;
    for (const auto& p : plants) {
        if (!names.insert(p.name()).second) throw ModelError("duplicate name '" + p.name() + "'");
        validate_automaton(p, events);
    }
    for (const auto& r : requirements) {
        if (!names.insert(r.name).second) throw ModelError("duplicate name '" + r.name + "'");
        if (r.is_automaton()) validate_automaton(r.automaton(), events);
        for (EventId e : r.events()) {
            if (e >= events.size()) throw ModelError("unknown event id in '" + r.name + "'");
            if (owners(e).empty())
                throw ModelError("unowned event '" + events[e].name + "' in requirement '" + r.name + "'");
        }
        if (!r.is_automaton()) validate_atoms(r.invariant().condition, *this, r.name);
    }
}

} // namespace mldes
