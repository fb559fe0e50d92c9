#include "mldes/product.hh"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace mldes {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Smaller index becomes the root so roots are group minima.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

std::size_t ProductSystem::group_of(std::size_t plant) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (std::binary_search(groups[g].begin(), groups[g].end(), plant)) return g;
    throw std::out_of_range("plant not in product system");
}

std::string ProductSystem::component_name(const ModelSet& model, std::size_t group) const {
    std::string name;
    for (std::size_t p : groups.at(group)) {
        if (!name.empty()) name += '+';
        name += model.plants.at(p).name();
    }
    return name;
}

ProductSystem refine(const std::vector<Automaton>& plants) {
    DisjointSets sets(plants.size());
    std::map<EventId, std::size_t> first_owner;
    for (std::size_t i = 0; i < plants.size(); ++i) {
        for (EventId e : plants[i].alphabet()) {
            auto [it, inserted] = first_owner.emplace(e, i);
            if (!inserted) sets.unite(it->second, i);
        }
    }
    ProductSystem ps;
    std::map<std::size_t, std::size_t> group_of_root;
    for (std::size_t i = 0; i < plants.size(); ++i) {
        std::size_t root = sets.find(i);
        auto [it, inserted] = group_of_root.emplace(root, ps.groups.size());
        if (inserted) {
            ps.groups.emplace_back();
            ps.alphabets.emplace_back();
        }
        ps.groups[it->second].push_back(i);
        auto& alpha = ps.alphabets[it->second];
        alpha.insert(alpha.end(), plants[i].alphabet().begin(), plants[i].alphabet().end());
    }
    for (auto& alpha : ps.alphabets) {
        std::sort(alpha.begin(), alpha.end());
        alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
    }
    return ps;
}

std::string product_system_json(const ProductSystem& ps, const ModelSet& model) {
    using nlohmann::json;
    json components = json::array();
    for (std::size_t g = 0; g < ps.size(); ++g) {
        json plants = json::array();
        for (std::size_t p : ps.groups[g]) plants.push_back(model.plants[p].name());
        components.push_back({{"index", g}, {"name", ps.component_name(model, g)}, {"plants", plants}});
    }
    json doc;
    doc["components"] = components;
    doc["plant_count"] = model.plants.size();
    return doc.dump(2) + "\n";
}

} // namespace mldes
