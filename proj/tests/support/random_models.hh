#pragma once

// Seeded generators for models, DMMs, DSMs and clusterings.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mldes/clustering.hh"
#include "mldes/matrix.hh"
#include "mldes/model.hh"

namespace mldes::testkit {

inline std::size_t uniform(std::mt19937& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

struct RandomModelOptions {
    std::size_t min_components = 2;
    std::size_t max_components = 6;
    std::size_t min_states = 2;
    std::size_t max_states = 4;
    std::size_t min_requirements = 1;
    std::size_t max_requirements = 8;
    bool prefix_closed_requirements = true;
    bool all_marked_plants = false;
    double controllable_probability = 0.6;
    double edge_probability = 0.6;
};

inline Automaton random_automaton(std::mt19937& rng, const std::string& name, const std::vector<EventId>& events,
                                  std::size_t states, bool all_marked, double edge_probability) {
    Automaton a(name);
    bool any_marked = false;
    for (std::size_t s = 0; s < states; ++s) {
        const bool marked = all_marked || chance(rng, 0.5);
        any_marked = any_marked || marked;
        a.add_state(name + "_" + std::to_string(s), marked);
    }
    if (!any_marked) a.set_marked(static_cast<StateId>(uniform(rng, 0, states - 1)), true);
    a.set_initial(0);
    for (EventId e : events) a.add_event(e);
    for (std::size_t s = 0; s < states; ++s)
        for (EventId e : events)
            if (chance(rng, edge_probability))
                a.add_transition(static_cast<StateId>(s), e, static_cast<StateId>(uniform(rng, 0, states - 1)));
    return a;
}

inline Predicate random_predicate(std::mt19937& rng, const ModelSet& model, const std::vector<std::size_t>& plants,
                                  int depth) {
    if (depth == 0 || chance(rng, 0.4)) {
        const std::size_t p = plants[uniform(rng, 0, plants.size() - 1)];
        const auto loc = static_cast<StateId>(uniform(rng, 0, model.plants[p].num_states() - 1));
        return Predicate::atom(p, loc);
    }
    switch (uniform(rng, 0, 2)) {
    case 0: return Predicate::negation(random_predicate(rng, model, plants, depth - 1));
    case 1:
        return Predicate::conjunction(
            {random_predicate(rng, model, plants, depth - 1), random_predicate(rng, model, plants, depth - 1)});
    default:
        return Predicate::disjunction(
            {random_predicate(rng, model, plants, depth - 1), random_predicate(rng, model, plants, depth - 1)});
    }
}

/// One plant per component, private alphabets of 2-3 events, plus a mix of
/// invariant and automaton requirements over 1-2 random plants.
inline ModelSet random_model(std::mt19937& rng, const RandomModelOptions& opt = {}) {
    ModelSet model;
    const std::size_t components = uniform(rng, opt.min_components, opt.max_components);
    std::vector<std::vector<EventId>> alphabets(components);
    for (std::size_t c = 0; c < components; ++c) {
        const std::size_t n = uniform(rng, 2, 3);
        for (std::size_t k = 0; k < n; ++k) {
            const std::string name = "g" + std::to_string(c) + "_e" + std::to_string(k);
            alphabets[c].push_back(model.events.add(name, chance(rng, opt.controllable_probability)));
        }
    }
    for (std::size_t c = 0; c < components; ++c)
        model.plants.push_back(random_automaton(rng, "G" + std::to_string(c), alphabets[c],
                                                uniform(rng, opt.min_states, opt.max_states), opt.all_marked_plants,
                                                opt.edge_probability));

    const std::size_t reqs = uniform(rng, opt.min_requirements, opt.max_requirements);
    for (std::size_t j = 0; j < reqs; ++j) {
        std::vector<std::size_t> involved{uniform(rng, 0, components - 1)};
        if (components > 1 && chance(rng, 0.7)) {
            std::size_t other = uniform(rng, 0, components - 2);
            if (other >= involved[0]) ++other;
            involved.push_back(other);
        }
        Requirement req;
        req.name = "K" + std::to_string(j);
        if (chance(rng, 0.5)) {
            const auto& alpha = alphabets[involved[0]];
            const EventId e = alpha[uniform(rng, 0, alpha.size() - 1)];
            req.body = Invariant{e, random_predicate(rng, model, involved, 2)};
        } else {
            std::vector<EventId> events;
            for (std::size_t c : involved) {
                std::vector<EventId> pool = alphabets[c];
                std::shuffle(pool.begin(), pool.end(), rng);
                pool.resize(uniform(rng, 1, std::min<std::size_t>(2, pool.size())));
                events.insert(events.end(), pool.begin(), pool.end());
            }
            std::sort(events.begin(), events.end());
            req.body = random_automaton(rng, req.name, events, uniform(rng, 2, 3), opt.prefix_closed_requirements,
                                        0.75);
        }
        model.requirements.push_back(std::move(req));
    }
    model.validate();
    return model;
}

/// Random binary DMM in which every requirement references 1-3 components.
inline Dmm random_dmm(std::mt19937& rng, std::size_t components, std::size_t requirements) {
    Dmm pr{IntMatrix::Zero(static_cast<Eigen::Index>(components), static_cast<Eigen::Index>(requirements))};
    for (std::size_t j = 0; j < requirements; ++j) {
        const std::size_t k = uniform(rng, 1, std::min<std::size_t>(3, components));
        std::vector<std::size_t> rows(components);
        std::iota(rows.begin(), rows.end(), 0);
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t i = 0; i < k; ++i)
            pr.values(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(j)) = 1;
    }
    return pr;
}

/// Random symmetric nonnegative integer matrix.
inline Dsm random_dsm(std::mt19937& rng, std::size_t n, double density = 0.4, int max_weight = 4) {
    Dsm p{IntMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
    for (std::size_t a = 0; a < n; ++a) {
        p.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) = static_cast<int>(uniform(rng, 0, 5));
        for (std::size_t b = a + 1; b < n; ++b)
            if (chance(rng, density)) {
                const int w = static_cast<int>(uniform(rng, 1, static_cast<std::size_t>(max_weight)));
                p.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = w;
                p.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = w;
            }
    }
    return p;
}

/// Random multilevel clustering over `members`: each non-singleton set is
/// split into 2-4 random cells, each designated bus with `bus_probability`.
inline Cluster random_clustering(std::mt19937& rng, std::vector<std::size_t> members, double bus_probability,
                                 bool is_bus = false) {
    Cluster c;
    c.components.insert(members.begin(), members.end());
    c.is_bus = is_bus;
    if (members.size() == 1) return c;
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t parts = uniform(rng, 2, std::min<std::size_t>(4, members.size()));
    std::vector<std::vector<std::size_t>> cells(parts);
    for (std::size_t i = 0; i < members.size(); ++i)
        cells[i < parts ? i : uniform(rng, 0, parts - 1)].push_back(members[i]);
    for (auto& cell : cells) {
        const bool bus = chance(rng, bus_probability);
        (bus ? c.bus : c.non_bus).push_back(random_clustering(rng, cell, bus_probability, bus));
    }
    normalize_children(c);
    return c;
}

inline std::vector<std::size_t> iota_vector(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

inline IndexSet iota_set(std::size_t n) {
    IndexSet s;
    for (std::size_t i = 0; i < n; ++i) s.insert(i);
    return s;
}

} // namespace mldes::testkit
