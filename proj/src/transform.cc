#include "mldes/transform.hh"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace mldes {

std::vector<const SynthesisNode*> SynthesisTree::preorder() const {
    std::vector<const SynthesisNode*> out;
    std::vector<const SynthesisNode*> stack{&root};
    while (!stack.empty()) {
        const SynthesisNode* n = stack.back();
        stack.pop_back();
        out.push_back(n);
        for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
    }
    return out;
}

std::vector<std::size_t> compute_related_clusters(std::span<const Cluster> children, const Dmm& pr, std::size_t r) {
    std::vector<std::size_t> related;
    for (std::size_t i = 0; i < children.size(); ++i) {
        for (std::size_t p : children[i].components) {
            if (pr.references(p, r)) {
                related.push_back(i);
                break;
            }
        }
    }
    return related;
}

IndexSet prop_req(Cluster& cluster, const Dmm& pr, const std::function<void()>& on_step) {
    IndexSet plants;
    const IndexSet pending = cluster.requirements;
    for (std::size_t r : pending) {
        const auto related_bus = compute_related_clusters(cluster.bus, pr, r);
        const auto related_non_bus = compute_related_clusters(cluster.non_bus, pr, r);
        if (related_non_bus.size() == 1) {
            cluster.non_bus[related_non_bus.front()].requirements.insert(r);
            cluster.requirements.erase(r);
        } else if (related_bus.size() == 1 && related_non_bus.empty()) {
            cluster.bus[related_bus.front()].requirements.insert(r);
            cluster.requirements.erase(r);
        } else {
            const IndexSet refs = pr.referenced(r);
            plants.insert(refs.begin(), refs.end());
        }
        if (on_step) on_step();
    }
    return plants;
}

namespace {

void check_empty_requirements(const Cluster& c) {
    if (!c.requirements.empty()) throw ClusteringError("non-root cluster already owns requirements");
    for (const auto& child : c.bus) check_empty_requirements(child);
    for (const auto& child : c.non_bus) check_empty_requirements(child);
}

struct Transformer {
    const Dmm& pr;
    const TransformObserver& observer;
    const Cluster* root = nullptr;
    std::size_t max_depth = 0;

    SynthesisNode visit(Cluster& c, std::string path, std::size_t depth) {
        max_depth = std::max(max_depth, depth);
        SynthesisNode node;
        node.cluster_components = c.components;
        node.from_bus = c.is_bus;
        node.path = std::move(path);
        if (c.components.size() == 1) {
            node.plants = c.components;
            for (std::size_t r : c.requirements) {
                const IndexSet refs = pr.referenced(r);
                node.plants.insert(refs.begin(), refs.end());
            }
            node.requirements = c.requirements;
            return node;
        }
        std::function<void()> step;
        if (observer) step = [this] { observer(*root); };
        node.plants = prop_req(c, pr, step);
        node.requirements = c.requirements;
        std::size_t k = 0;
        for (auto& child : c.bus) node.children.push_back(visit(child, node.path + "." + std::to_string(k++), depth + 1));
        for (auto& child : c.non_bus)
            node.children.push_back(visit(child, node.path + "." + std::to_string(k++), depth + 1));
        return node;
    }
};

} // namespace

SynthesisTree transform_c_to_t(Cluster clustering, const Dmm& pr, const TransformObserver& observer) {
    validate_clustering(clustering);
    normalize_children(clustering);
    for (std::size_t i = 0; i < pr.components(); ++i)
        if (!clustering.components.contains(i))
            throw ClusteringError("clustering does not contain component " + std::to_string(i));
    if (clustering.components.size() != pr.components())
        throw ClusteringError("clustering mentions components outside the DMM");
    IndexSet all_requirements;
    for (std::size_t j = 0; j < pr.requirements(); ++j) all_requirements.insert(j);
    if (clustering.requirements != all_requirements)
        throw ClusteringError("root cluster must own every requirement");
    for (const auto& child : clustering.bus) check_empty_requirements(child);
    for (const auto& child : clustering.non_bus) check_empty_requirements(child);

    Transformer t{pr, observer};
    t.root = &clustering;
    SynthesisTree tree;
    tree.root = t.visit(clustering, "0", 1);
    tree.component_count = pr.components();
    tree.requirement_count = pr.requirements();
    tree.recursion_depth = t.max_depth;
    return tree;
}

namespace {

using nlohmann::json;

json names_of(const IndexSet& set, const std::vector<std::string>& names) {
    json out = json::array();
    for (std::size_t x : set) out.push_back(names.at(x));
    return out;
}

json node_json(const SynthesisNode& n, const std::vector<std::string>& components,
               const std::vector<std::string>& requirements) {
    json j;
    j["path"] = n.path;
    j["plants"] = names_of(n.plants, components);
    j["requirements"] = names_of(n.requirements, requirements);
    j["cluster"] = names_of(n.cluster_components, components);
    j["bus"] = n.from_bus;
    j["synthesize"] = n.needs_synthesis();
    json children = json::array();
    for (const auto& c : n.children) children.push_back(node_json(c, components, requirements));
    j["children"] = children;
    return j;
}

std::string join_names(const IndexSet& set, const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t x : set) {
        if (!out.empty()) out += ", ";
        out += names.at(x);
    }
    return out;
}

} // namespace

std::string tree_json(const SynthesisTree& tree, const std::vector<std::string>& component_names,
                      const std::vector<std::string>& requirement_names) {
    json doc;
    doc["components"] = component_names;
    doc["requirements"] = requirement_names;
    doc["root"] = node_json(tree.root, component_names, requirement_names);
    return doc.dump(2) + "\n";
}

namespace {

IndexSet resolve_names(const json& list, const std::vector<std::string>& names, const char* what) {
    IndexSet out;
    for (const auto& item : list) {
        const auto name = item.get<std::string>();
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw ClusteringError(std::string("unknown ") + what + " '" + name + "'");
        out.insert(static_cast<std::size_t>(it - names.begin()));
    }
    return out;
}

SynthesisNode node_from_json(const json& j, const std::vector<std::string>& components,
                             const std::vector<std::string>& requirements, std::size_t depth, std::size_t& max_depth) {
    max_depth = std::max(max_depth, depth);
    SynthesisNode n;
    n.path = j.at("path").get<std::string>();
    n.plants = resolve_names(j.at("plants"), components, "component");
    n.requirements = resolve_names(j.at("requirements"), requirements, "requirement");
    n.cluster_components = resolve_names(j.value("cluster", json::array()), components, "component");
    n.from_bus = j.value("bus", false);
    for (const auto& child : j.value("children", json::array()))
        n.children.push_back(node_from_json(child, components, requirements, depth + 1, max_depth));
    return n;
}

} // namespace

SynthesisTree tree_from_json(std::string_view text, const std::vector<std::string>& component_names,
                             const std::vector<std::string>& requirement_names) {
    try {
        const json doc = json::parse(text);
        SynthesisTree tree;
        tree.root = node_from_json(doc.at("root"), component_names, requirement_names, 1, tree.recursion_depth);
        tree.component_count = component_names.size();
        tree.requirement_count = requirement_names.size();
        return tree;
    } catch (const json::exception& e) {
        throw ClusteringError(std::string("tree JSON: ") + e.what());
    }
}

std::string tree_dot(const SynthesisTree& tree, const std::vector<std::string>& component_names,
                     const std::map<std::string, std::size_t>& css) {
    std::ostringstream os;
    os << "digraph mldes {\n  node [shape=box, fontname=\"Helvetica\", fontsize=10];\n";
    std::size_t id = 0;
    std::map<const SynthesisNode*, std::size_t> ids;
    for (const SynthesisNode* n : tree.preorder()) {
        ids[n] = id;
        os << "  n" << id << " [label=\"";
        if (n->needs_synthesis()) {
            os << "G: {" << join_names(n->plants, component_names) << "}\\n|R|: " << n->requirements.size();
            auto it = css.find(n->path);
            if (it != css.end()) os << "\\ncss: " << it->second;
        } else if (n->cluster_components.size() == 1) {
            os << "G: " << join_names(n->cluster_components, component_names);
        }
        os << "\"";
        std::vector<std::string> style;
        if (n->from_bus) style.push_back("filled");
        if (!n->needs_synthesis()) style.push_back("dashed");
        if (!style.empty()) {
            os << ", style=\"";
            for (std::size_t i = 0; i < style.size(); ++i) os << (i ? "," : "") << style[i];
            os << "\"";
        }
        if (n->from_bus) os << ", fillcolor=\"#d9f4fa\"";
        os << "];\n";
        ++id;
    }
    for (const SynthesisNode* n : tree.preorder())
        for (const auto& c : n->children) os << "  n" << ids[n] << " -> n" << ids[&c] << ";\n";
    os << "}\n";
    return os.str();
}

} // namespace mldes
