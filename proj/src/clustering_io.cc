#include "mldes/clustering.hh"

#include <cctype>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mldes {

namespace {

class BracketParser {
public:
    BracketParser(std::string_view text, const std::map<std::string, std::size_t, std::less<>>& names)
        : text_(text), names_(names) {}

    Cluster parse() {
        skip_space();
        Cluster root;
        if (peek() == '[') {
            root = make_cluster(parse_list(false), false);
        } else {
            root = parse_cluster(false);
        }
        skip_space();
        if (pos_ != text_.size()) error("trailing input");
        return root;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ClusteringError("clustering " + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_[pos_] == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void expect(char c) {
        if (peek() != c) error(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string parse_name() {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-' || text_[pos_] == '+'))
            ++pos_;
        if (start == pos_) error("expected a component name");
        return std::string(text_.substr(start, pos_ - start));
    }

    bool at_bus_label() {
        skip_space();
        if (text_.substr(pos_, 3) != "bus") return false;
        std::size_t p = pos_ + 3;
        while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
        return p < text_.size() && text_[p] == ':';
    }

    Cluster parse_item(bool is_bus) {
        if (peek() == '{') return parse_cluster(is_bus);
        std::string name = parse_name();
        auto it = names_.find(name);
        if (it == names_.end()) error("unknown component '" + name + "'");
        Cluster leaf;
        leaf.components.insert(it->second);
        leaf.is_bus = is_bus;
        return leaf;
    }

    std::vector<Cluster> parse_list(bool is_bus) {
        expect('[');
        std::vector<Cluster> items;
        if (peek() != ']') {
            items.push_back(parse_item(is_bus));
            while (peek() == ',') {
                ++pos_;
                items.push_back(parse_item(is_bus));
            }
        }
        expect(']');
        return items;
    }

    Cluster parse_cluster(bool is_bus) {
        expect('{');
        std::vector<Cluster> children;
        for (;;) {
            if (at_bus_label()) {
                pos_ += 3;
                expect(':');
                for (auto& c : (peek() == '[' ? parse_list(true) : std::vector<Cluster>{parse_item(true)}))
                    children.push_back(std::move(c));
            } else if (peek() == '[') {
                for (auto& c : parse_list(false)) children.push_back(std::move(c));
            } else {
                children.push_back(parse_item(false));
            }
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            break;
        }
        expect('}');
        return make_cluster(std::move(children), is_bus);
    }

    Cluster make_cluster(std::vector<Cluster> children, bool is_bus) {
        if (children.empty()) error("empty cluster");
        Cluster c;
        c.is_bus = is_bus;
        for (const auto& child : children) {
            for (std::size_t x : child.components)
                if (!c.components.insert(x).second) error("component appears in two sibling cells");
        }
        // A cluster with a single child is that child.
        if (children.size() == 1) {
            Cluster only = std::move(children.front());
            only.is_bus = is_bus;
            return only;
        }
        for (auto& child : children) (child.is_bus ? c.bus : c.non_bus).push_back(std::move(child));
        return c;
    }

    std::string_view text_;
    const std::map<std::string, std::size_t, std::less<>>& names_;
    std::size_t pos_ = 0;
};

using nlohmann::json;

Cluster cluster_from_json(const json& j, const std::map<std::string, std::size_t, std::less<>>& names, bool is_bus) {
    Cluster c;
    c.is_bus = j.value("bus", is_bus);
    for (const auto& name : j.at("components")) {
        auto it = names.find(name.get<std::string>());
        if (it == names.end()) throw ClusteringError("unknown component '" + name.get<std::string>() + "'");
        c.components.insert(it->second);
    }
    for (const auto& child : j.value("B", json::array())) c.bus.push_back(cluster_from_json(child, names, true));
    for (const auto& child : j.value("M", json::array())) c.non_bus.push_back(cluster_from_json(child, names, false));
    for (const auto& r : j.value("R", json::array())) c.requirements.insert(r.get<std::size_t>());
    c.forced_split = j.value("forced_split", false);
    return c;
}

void format_into(std::ostringstream& os, const Cluster& c, const std::vector<std::string>& names) {
    if (c.is_leaf()) {
        os << names.at(c.min_component());
        return;
    }
    auto items = [&](const std::vector<Cluster>& list) {
        os << '[';
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) os << ", ";
            format_into(os, list[i], names);
        }
        os << ']';
    };
    os << '{';
    if (!c.bus.empty()) {
        os << "bus:";
        items(c.bus);
        if (!c.non_bus.empty()) os << ", ";
    }
    if (!c.non_bus.empty()) items(c.non_bus);
    os << '}';
}

json cluster_to_json(const Cluster& c, const std::vector<std::string>& names) {
    json j;
    json comps = json::array();
    for (std::size_t x : c.components) comps.push_back(names.at(x));
    j["components"] = comps;
    j["bus"] = c.is_bus;
    json b = json::array();
    for (const auto& child : c.bus) b.push_back(cluster_to_json(child, names));
    json m = json::array();
    for (const auto& child : c.non_bus) m.push_back(cluster_to_json(child, names));
    j["B"] = b;
    j["M"] = m;
    j["R"] = json(std::vector<std::size_t>(c.requirements.begin(), c.requirements.end()));
    if (c.forced_split) j["forced_split"] = true;
    return j;
}

void clear_requirements(Cluster& c) {
    c.requirements.clear();
    for (auto& child : c.bus) clear_requirements(child);
    for (auto& child : c.non_bus) clear_requirements(child);
}

bool looks_like_json(std::string_view text) {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos || text[first] != '{') return false;
    auto second = text.find_first_not_of(" \t\r\n", first + 1);
    return second != std::string_view::npos && text[second] == '"';
}

} // namespace

Cluster load_clustering(std::string_view text, const std::vector<std::string>& component_names,
                        std::size_t requirement_count,
                        const std::vector<std::pair<std::string, std::size_t>>& aliases) {
    std::map<std::string, std::size_t, std::less<>> names;
    for (std::size_t i = 0; i < component_names.size(); ++i) names.emplace(component_names[i], i);
    for (const auto& [alias, index] : aliases) names.emplace(alias, index);

    Cluster root;
    if (looks_like_json(text)) {
        try {
            root = cluster_from_json(json::parse(text), names, false);
        } catch (const json::exception& e) {
            throw ClusteringError(std::string("clustering JSON: ") + e.what());
        }
    } else {
        root = BracketParser(text, names).parse();
    }

    for (std::size_t i = 0; i < component_names.size(); ++i)
        if (!root.components.contains(i)) throw ClusteringError("missing component '" + component_names[i] + "'");
    validate_clustering(root);
    normalize_children(root);
    clear_requirements(root);
    for (std::size_t j = 0; j < requirement_count; ++j) root.requirements.insert(j);
    return root;
}

std::string format_clustering(const Cluster& c, const std::vector<std::string>& component_names) {
    std::ostringstream os;
    if (c.is_leaf()) {
        os << '{' << '[' << component_names.at(c.min_component()) << ']' << '}';
    } else {
        format_into(os, c, component_names);
    }
    os << '\n';
    return os.str();
}

std::string clustering_json(const Cluster& c, const std::vector<std::string>& component_names) {
    return cluster_to_json(c, component_names).dump(2) + "\n";
}

} // namespace mldes
