#include "mldes/model_io.hh"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mldes {

namespace {

struct Token {
    std::string text;
    std::size_t line = 0;
    std::size_t column = 0;
};

[[noreturn]] void fail(const std::string& what, const Token& at) {
    throw ModelError(what, at.line, at.column);
}

struct RawEdge {
    Token event;
    Token target;
};

struct RawLocation {
    Token name;
    bool initial = false;
    bool marked = false;
    std::vector<RawEdge> edges;
};

struct RawAutomaton {
    Token name;
    std::vector<Token> alphabet;
    std::vector<RawLocation> locations;
};

struct RawRequirement {
    Token name;
    bool is_invariant = false;
    RawAutomaton automaton;
    Token event;
    std::vector<Token> predicate;
};

struct RawEvent {
    Token name;
    bool controllable = true;
};

struct RawModel {
    std::vector<RawEvent> events;
    std::vector<RawAutomaton> plants;
    std::vector<RawRequirement> requirements;
};

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

void require_identifier(const Token& t) {
    if (!is_identifier(t.text)) fail("invalid identifier '" + t.text + "'", t);
}

// Splits on whitespace; parentheses become separate tokens.
std::vector<Token> tokenize_line(std::string_view line, std::size_t line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(' || c == ')') {
            out.push_back(Token{std::string(1, c), line_no, i + 1});
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '(' &&
               line[i] != ')' && line[i] != '#')
            ++i;
        out.push_back(Token{std::string(line.substr(start, i - start)), line_no, start + 1});
    }
    return out;
}

class TextParser {
public:
    explicit TextParser(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            ++line_no;
            auto tokens = tokenize_line(text.substr(pos, nl - pos), line_no);
            if (!tokens.empty()) lines_.push_back(std::move(tokens));
            pos = nl + 1;
        }
    }

    RawModel parse() {
        RawModel raw;
        while (cursor_ < lines_.size()) {
            const auto& head = lines_[cursor_];
            const auto& kw = head.front();
            if (kw.text == "events") {
                expect_arity(head, 1);
                ++cursor_;
                parse_events(raw);
            } else if (kw.text == "plant") {
                expect_arity(head, 2);
                RawAutomaton a;
                a.name = head[1];
                require_identifier(a.name);
                ++cursor_;
                parse_automaton_body(a, nullptr);
                raw.plants.push_back(std::move(a));
            } else if (kw.text == "requirement") {
                expect_arity(head, 2);
                RawRequirement r;
                r.name = head[1];
                require_identifier(r.name);
                r.automaton.name = r.name;
                ++cursor_;
                parse_automaton_body(r.automaton, &r);
                raw.requirements.push_back(std::move(r));
            } else {
                fail("expected 'events', 'plant' or 'requirement', got '" + kw.text + "'", kw);
            }
        }
        return raw;
    }

private:
    void expect_arity(const std::vector<Token>& line, std::size_t n) {
        if (line.size() != n) fail("unexpected number of fields", line.front());
    }

    const std::vector<Token>& next_line(const Token& opened) {
        if (cursor_ >= lines_.size()) fail("missing 'end'", opened);
        return lines_[cursor_++];
    }

    void parse_events(RawModel& raw) {
        const Token opened = lines_[cursor_ - 1].front();
        for (;;) {
            const auto& line = next_line(opened);
            if (line.front().text == "end") {
                expect_arity(line, 1);
                return;
            }
            if (line.size() != 2) fail("expected '<event> controllable|uncontrollable'", line.front());
            require_identifier(line[0]);
            RawEvent ev{line[0], true};
            if (line[1].text == "uncontrollable") ev.controllable = false;
            else if (line[1].text != "controllable")
                fail("expected 'controllable' or 'uncontrollable'", line[1]);
            raw.events.push_back(std::move(ev));
        }
    }

    void parse_automaton_body(RawAutomaton& a, RawRequirement* req) {
        const Token opened = a.name;
        for (;;) {
            const auto& line = next_line(opened);
            const auto& kw = line.front();
            if (kw.text == "end") {
                expect_arity(line, 1);
                break;
            }
            if (kw.text == "alphabet") {
                for (std::size_t i = 1; i < line.size(); ++i) a.alphabet.push_back(line[i]);
            } else if (kw.text == "location") {
                if (line.size() < 2) fail("location without a name", kw);
                RawLocation loc;
                loc.name = line[1];
                require_identifier(loc.name);
                for (std::size_t i = 2; i < line.size(); ++i) {
                    if (line[i].text == "initial") loc.initial = true;
                    else if (line[i].text == "marked") loc.marked = true;
                    else fail("unknown location flag '" + line[i].text + "'", line[i]);
                }
                a.locations.push_back(std::move(loc));
            } else if (kw.text == "edge") {
                if (line.size() != 4 || line[2].text != "goto")
                    fail("expected 'edge <event> goto <location>'", kw);
                if (a.locations.empty()) fail("edge before any location", kw);
                a.locations.back().edges.push_back(RawEdge{line[1], line[3]});
            } else if (kw.text == "invariant" && req != nullptr) {
                if (line.size() < 4 || line[2].text != "needs")
                    fail("expected 'invariant <event> needs <predicate>'", kw);
                if (req->is_invariant) fail("requirement has more than one invariant", kw);
                req->is_invariant = true;
                req->event = line[1];
                req->predicate.assign(line.begin() + 3, line.end());
            } else {
                fail("unexpected '" + kw.text + "'", kw);
            }
        }
        if (req != nullptr && req->is_invariant && (!a.locations.empty() || !a.alphabet.empty()))
            fail("requirement mixes invariant and automaton bodies", req->name);
        if (req != nullptr && !req->is_invariant && a.locations.empty())
            fail("requirement has neither an invariant nor locations", req->name);
        if (req == nullptr && a.locations.empty()) fail("plant has no locations", a.name);
    }

    std::vector<std::vector<Token>> lines_;
    std::size_t cursor_ = 0;
};

class PredicateParser {
public:
    PredicateParser(const std::vector<Token>& tokens, const ModelSet& model, Token anchor)
        : tokens_(tokens), model_(model), anchor_(std::move(anchor)) {}

    Predicate parse() {
        if (tokens_.empty()) fail("empty predicate", anchor_);
        Predicate p = parse_or();
        if (pos_ != tokens_.size()) fail("unexpected '" + tokens_[pos_].text + "' in predicate", tokens_[pos_]);
        return p;
    }

private:
    const Token& peek() const { return pos_ < tokens_.size() ? tokens_[pos_] : anchor_; }
    bool at(std::string_view text) const { return pos_ < tokens_.size() && tokens_[pos_].text == text; }

    Predicate parse_or() {
        std::vector<Predicate> ops{parse_and()};
        while (at("or")) {
            ++pos_;
            ops.push_back(parse_and());
        }
        return Predicate::disjunction(std::move(ops));
    }

    Predicate parse_and() {
        std::vector<Predicate> ops{parse_unary()};
        while (at("and")) {
            ++pos_;
            ops.push_back(parse_unary());
        }
        return Predicate::conjunction(std::move(ops));
    }

    Predicate parse_unary() {
        if (pos_ >= tokens_.size()) fail("predicate ends unexpectedly", anchor_);
        const Token& t = tokens_[pos_++];
        if (t.text == "not") return Predicate::negation(parse_unary());
        if (t.text == "(") {
            Predicate inner = parse_or();
            if (!at(")")) fail("expected ')'", peek());
            ++pos_;
            return inner;
        }
        if (t.text == "true") return Predicate::constant(true);
        if (t.text == "false") return Predicate::constant(false);
        auto dot = t.text.find('.');
        if (dot == std::string::npos) fail("expected '<plant>.<location>', got '" + t.text + "'", t);
        auto plant = model_.find_plant(std::string_view(t.text).substr(0, dot));
        if (!plant) fail("unknown location atom '" + t.text + "': no such plant", t);
        auto loc = model_.plants[*plant].find_state(std::string_view(t.text).substr(dot + 1));
        if (!loc) fail("unknown location atom '" + t.text + "': no such location", t);
        return Predicate::atom(*plant, *loc);
    }

    const std::vector<Token>& tokens_;
    const ModelSet& model_;
    Token anchor_;
    std::size_t pos_ = 0;
};

EventId resolve_event(const ModelSet& model, const Token& t) {
    auto e = model.events.find(t.text);
    if (!e) fail("unknown event '" + t.text + "'", t);
    return *e;
}

Automaton build_automaton(const RawAutomaton& raw, const ModelSet& model) {
    Automaton a(raw.name.text);
    std::map<std::string, StateId, std::less<>> ids;
    std::optional<StateId> initial;
    for (const auto& loc : raw.locations) {
        if (ids.contains(loc.name.text)) fail("duplicate location '" + loc.name.text + "'", loc.name);
        StateId s = a.add_state(loc.name.text, loc.marked);
        ids.emplace(loc.name.text, s);
        if (loc.initial) {
            if (initial) fail("second initial location in '" + raw.name.text + "'", loc.name);
            initial = s;
        }
    }
    if (!initial) fail("no initial location in '" + raw.name.text + "'", raw.name);
    a.set_initial(*initial);
    for (const auto& ev : raw.alphabet) a.add_event(resolve_event(model, ev));
    for (StateId s = 0; s < raw.locations.size(); ++s) {
        for (const auto& edge : raw.locations[s].edges) {
            EventId e = resolve_event(model, edge.event);
            auto target = ids.find(edge.target.text);
            if (target == ids.end()) fail("unknown location '" + edge.target.text + "'", edge.target);
            auto existing = a.step(s, e);
            if (existing && *existing != target->second)
                fail("nondeterministic automaton '" + raw.name.text + "': two edges on '" + edge.event.text +
                         "' leave '" + raw.locations[s].name.text + "'",
                     edge.event);
            a.add_transition(s, e, target->second);
        }
    }
    return a;
}

ModelSet resolve(const RawModel& raw) {
    ModelSet model;
    for (const auto& ev : raw.events) {
        if (model.events.find(ev.name.text)) fail("duplicate event '" + ev.name.text + "'", ev.name);
        model.events.add(ev.name.text, ev.controllable);
    }
    std::map<std::string, Token, std::less<>> names;
    auto claim = [&](const Token& name) {
        if (names.contains(name.text)) fail("duplicate name '" + name.text + "'", name);
        names.emplace(name.text, name);
    };
    for (const auto& p : raw.plants) {
        claim(p.name);
        model.plants.push_back(build_automaton(p, model));
    }
    for (const auto& r : raw.requirements) {
        claim(r.name);
        if (r.is_invariant) {
            EventId e = resolve_event(model, r.event);
            if (model.owners(e).empty()) fail("unowned event '" + r.event.text + "'", r.event);
            Predicate pred = PredicateParser(r.predicate, model, r.event).parse();
            model.requirements.push_back(Requirement{r.name.text, Invariant{e, std::move(pred)}});
        } else {
            Automaton a = build_automaton(r.automaton, model);
            for (EventId e : a.alphabet()) {
                if (model.owners(e).empty()) {
                    // Point at the first mention of the event inside the requirement.
                    Token where = r.name;
                    for (const auto& loc : r.automaton.locations)
                        for (const auto& edge : loc.edges)
                            if (edge.event.text == model.events[e].name) where = edge.event;
                    for (const auto& t : r.automaton.alphabet)
                        if (t.text == model.events[e].name) where = t;
                    fail("unowned event '" + model.events[e].name + "'", where);
                }
            }
            model.requirements.push_back(Requirement{r.name.text, std::move(a)});
        }
    }
    model.validate();
    return model;
}

// JSON ------------------------------------------------------------------

using nlohmann::json;

Token json_token(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw ModelError(std::string("JSON: missing string field '") + key + "'");
    return Token{j[key].get<std::string>(), 0, 0};
}

RawAutomaton raw_from_json(const json& j) {
    RawAutomaton a;
    a.name = json_token(j, "name");
    require_identifier(a.name);
    if (j.contains("alphabet"))
        for (const auto& e : j["alphabet"]) a.alphabet.push_back(Token{e.get<std::string>(), 0, 0});
    std::map<std::string, std::size_t> index;
    for (const auto& l : j.value("locations", json::array())) {
        RawLocation loc;
        loc.name = json_token(l, "name");
        require_identifier(loc.name);
        loc.initial = l.value("initial", false);
        loc.marked = l.value("marked", false);
        index.emplace(loc.name.text, a.locations.size());
        a.locations.push_back(std::move(loc));
    }
    for (const auto& e : j.value("edges", json::array())) {
        Token from = json_token(e, "from");
        auto it = index.find(from.text);
        if (it == index.end()) fail("unknown location '" + from.text + "'", from);
        a.locations[it->second].edges.push_back(RawEdge{json_token(e, "event"), json_token(e, "to")});
    }
    return a;
}

json automaton_to_json(const Automaton& a, const EventTable& events) {
    json j;
    j["name"] = a.name();
    json alphabet = json::array();
    for (EventId e : a.alphabet()) alphabet.push_back(events[e].name);
    j["alphabet"] = alphabet;
    json locations = json::array();
    json edges = json::array();
    for (StateId s = 0; s < a.num_states(); ++s) {
        locations.push_back({{"name", a.state_name(s)}, {"initial", s == a.initial()}, {"marked", a.is_marked(s)}});
        for (const auto& edge : a.edges(s))
            edges.push_back({{"from", a.state_name(s)}, {"event", events[edge.event].name},
                             {"to", a.state_name(edge.target)}});
    }
    j["locations"] = locations;
    j["edges"] = edges;
    return j;
}

void write_automaton_body(std::ostringstream& os, const Automaton& a, const EventTable& events) {
    os << "  alphabet";
    for (EventId e : a.alphabet()) os << ' ' << events[e].name;
    os << '\n';
    for (StateId s = 0; s < a.num_states(); ++s) {
        os << "  location " << a.state_name(s);
        if (s == a.initial()) os << " initial";
        if (a.is_marked(s)) os << " marked";
        os << '\n';
        for (const auto& edge : a.edges(s))
            os << "    edge " << events[edge.event].name << " goto " << a.state_name(edge.target) << '\n';
    }
}

enum class Precedence { disjunction = 0, conjunction = 1, unary = 2 };

void format_into(std::ostringstream& os, const Predicate& p, const ModelSet& model, Precedence context) {
    using K = Predicate::Kind;
    switch (p.kind()) {
    case K::constant: os << (p.value() ? "true" : "false"); return;
    case K::atom: {
        const auto& plant = model.plants.at(p.plant());
        os << plant.name() << '.' << plant.state_name(p.location());
        return;
    }
    case K::negation:
        os << "not ";
        format_into(os, p.operands().front(), model, Precedence::unary);
        return;
    case K::conjunction:
    case K::disjunction: {
        const bool conj = p.kind() == K::conjunction;
        const Precedence own = conj ? Precedence::conjunction : Precedence::disjunction;
        const bool parens = context > own;
        if (parens) os << '(';
        bool first = true;
        for (const auto& op : p.operands()) {
            if (!first) os << (conj ? " and " : " or ");
            first = false;
            format_into(os, op, model, static_cast<Precedence>(static_cast<int>(own) + 1));
        }
        if (parens) os << ')';
        return;
    }
    }
}

} // namespace

ModelSet parse_model(std::string_view text) { return resolve(TextParser(text).parse()); }

ModelSet parse_model_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("JSON: ") + e.what());
    }
    RawModel raw;
    try {
        for (const auto& e : j.value("events", json::array()))
            raw.events.push_back(RawEvent{json_token(e, "name"), e.value("controllable", true)});
        for (const auto& p : j.value("plants", json::array())) raw.plants.push_back(raw_from_json(p));
        for (const auto& r : j.value("requirements", json::array())) {
            RawRequirement req;
            req.name = json_token(r, "name");
            require_identifier(req.name);
            if (r.value("kind", std::string("automaton")) == "invariant") {
                req.is_invariant = true;
                req.event = json_token(r, "event");
                req.predicate = tokenize_line(json_token(r, "predicate").text, 0);
            } else {
                req.automaton = raw_from_json(r);
            }
            raw.requirements.push_back(std::move(req));
        }
    } catch (const json::exception& e) {
        throw ModelError(std::string("JSON: ") + e.what());
    }
    return resolve(raw);
}

ModelSet parse_model_any(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') return parse_model_json(text);
    return parse_model(text);
}

Predicate parse_predicate(std::string_view text, const ModelSet& model) {
    auto tokens = tokenize_line(text, 0);
    return PredicateParser(tokens, model, Token{std::string(text), 0, 0}).parse();
}

std::string format_predicate(const Predicate& p, const ModelSet& model) {
    std::ostringstream os;
    format_into(os, p, model, Precedence::disjunction);
    return os.str();
}

std::string serialize_model(const ModelSet& model) {
    std::ostringstream os;
    os << "events\n";
    for (const auto& ev : model.events)
        os << "  " << ev.name << (ev.controllable ? " controllable" : " uncontrollable") << '\n';
    os << "end\n";
    for (const auto& p : model.plants) {
        os << "\nplant " << p.name() << '\n';
        write_automaton_body(os, p, model.events);
        os << "end\n";
    }
    for (const auto& r : model.requirements) {
        os << "\nrequirement " << r.name << '\n';
        if (r.is_automaton()) {
            write_automaton_body(os, r.automaton(), model.events);
        } else {
            os << "  invariant " << model.events[r.invariant().event].name << " needs "
               << format_predicate(r.invariant().condition, model) << '\n';
        }
        os << "end\n";
    }
    return os.str();
}

std::string serialize_model_json(const ModelSet& model) {
    json j;
    json events = json::array();
    for (const auto& ev : model.events) events.push_back({{"name", ev.name}, {"controllable", ev.controllable}});
    j["events"] = events;
    json plants = json::array();
    for (const auto& p : model.plants) plants.push_back(automaton_to_json(p, model.events));
    j["plants"] = plants;
    json reqs = json::array();
    for (const auto& r : model.requirements) {
        json rj;
        if (r.is_automaton()) {
            rj = automaton_to_json(r.automaton(), model.events);
            rj["kind"] = "automaton";
        } else {
            rj["kind"] = "invariant";
            rj["event"] = model.events[r.invariant().event].name;
            rj["predicate"] = format_predicate(r.invariant().condition, model);
        }
        rj["name"] = r.name;
        reqs.push_back(rj);
    }
    j["requirements"] = reqs;
    return j.dump(2) + "\n";
}

ModelSet load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model_any(buffer.str());
}

} // namespace mldes
